// kinex command line: builds a JSON config from --config and flags and hands
// it to the C library.

#include <CLI11.hpp>

#include <cstdint>
#include <deque>
#include <fstream>
#include <iostream>
#include <string>

#include "json.hpp"
#include "kinex/kinex.h"

namespace {

using Json = nlohmann::json;

enum class Kind { integer, unsigned_integer, real, text, flag };

struct Flag {
  std::string key;
  Kind kind;
  std::int64_t i = 0;
  std::uint64_t u = 0;
  double r = 0.0;
  std::string s;
  bool b = false;
  CLI::Option* opt = nullptr;
};

struct FlagSpec {
  const char* name;
  const char* key;
  Kind kind;
  const char* help;
};

struct Command {
  std::string name;  // library command
  std::string figure;
  CLI::App* app = nullptr;
  std::deque<Flag> flags;
  std::string config_path;
  std::string out;
  bool force = false;
};

void add_flags(Command& cmd, std::initializer_list<FlagSpec> specs) {
  for (const auto& sp : specs) {
    Flag& f = cmd.flags.emplace_back();
    f.key = sp.key;
    f.kind = sp.kind;
    switch (sp.kind) {
      case Kind::integer: f.opt = cmd.app->add_option(sp.name, f.i, sp.help); break;
      case Kind::unsigned_integer: f.opt = cmd.app->add_option(sp.name, f.u, sp.help); break;
      case Kind::real: f.opt = cmd.app->add_option(sp.name, f.r, sp.help); break;
      case Kind::text: f.opt = cmd.app->add_option(sp.name, f.s, sp.help); break;
      case Kind::flag: f.opt = cmd.app->add_flag(sp.name, f.b, sp.help); break;
    }
  }
  cmd.app->add_option("--config", cmd.config_path, "JSON config or manifest.json; flags override its values");
  cmd.app->add_option("--out", cmd.out, "output directory (default runs/<name>)");
  cmd.app->add_flag("--force", cmd.force, "overwrite a non-empty output directory");
}

const FlagSpec kSeed{"--seed", "seed", Kind::unsigned_integer, "RNG seed"};

void simulate_flags(Command& c) {
  add_flags(c, {{"--n", "N", Kind::integer, "number of agents"},
                {"--rule", "rule", Kind::text, "binomial | uniform | repeated_average | saving"},
                {"--s", "s", Kind::real, "reshuffled fraction for the saving rule"},
                {"--initial", "initial", Kind::text, "dirac:k | uniform:a:b | custom:x,y,..."},
                {"--events", "events", Kind::integer, "number of exchange events"},
                {"--snapshot-every", "snapshot_every", Kind::integer, "events between snapshots"},
                {"--time-convention", "time_convention", Kind::text, "discrete | poisson_clock"},
                kSeed});
}

// Single-line message for stderr.
std::string one_line(std::string s) {
  for (char& ch : s)
    if (ch == '\n' || ch == '\r') ch = ' ';
  return s;
}

int fail_usage(const std::string& msg) {
  std::cerr << "kinex: " << one_line(msg) << '\n';
  return 2;
}

int execute(Command& cmd) {
  Json cfg = Json::object();
  if (!cmd.config_path.empty()) {
    std::ifstream in(cmd.config_path);
    if (!in) return fail_usage("cannot read config " + cmd.config_path);
    try {
      cfg = Json::parse(in);
    } catch (const Json::exception& e) {
      return fail_usage("config " + cmd.config_path + " is not valid JSON: " + e.what());
    }
    if (!cfg.is_object()) return fail_usage("config " + cmd.config_path + " must hold a JSON object");
    if (cfg.contains("artifacts") && cfg.contains("config")) {
      if (cfg.value("command", cmd.name) != cmd.name)
        return fail_usage("manifest " + cmd.config_path + " was written by '" + cfg["command"].get<std::string>() + "'");
      cfg = Json(cfg["config"]);
    }
  }
  for (const Flag& f : cmd.flags) {
    if (f.opt->count() == 0) continue;
    switch (f.kind) {
      case Kind::integer: cfg[f.key] = f.i; break;
      case Kind::unsigned_integer: cfg[f.key] = f.u; break;
      case Kind::real: cfg[f.key] = f.r; break;
      case Kind::text: cfg[f.key] = f.s; break;
      case Kind::flag: cfg[f.key] = f.b; break;
    }
  }
  if (!cmd.figure.empty()) cfg["figure"] = cmd.figure;
  const std::string out = cmd.out.empty() ? "runs/" + (cmd.figure.empty() ? cmd.name : cmd.figure) : cmd.out;

  char* manifest = nullptr;
  const kinex_status st = kinex_run(cmd.name.c_str(), cfg.dump().c_str(), out.c_str(), cmd.force ? 1 : 0, &manifest);
  if (st != KINEX_OK) {
    std::cerr << "kinex: " << kinex_status_name(st) << " error: " << one_line(kinex_last_error()) << '\n';
    return st == KINEX_E_VALIDATION ? 2 : 1;
  }
  const Json m = Json::parse(manifest);
  kinex_string_free(manifest);
  std::cout << "wrote " << out << ":";
  for (const auto& [name, sum] : m["artifacts"].items()) std::cout << ' ' << name;
  std::cout << " manifest.json\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kinex: binomial reshuffling wealth-exchange laboratory"};
  app.set_version_flag("--version", kinex_version());
  app.require_subcommand(1);

  std::deque<Command> commands;
  auto make = [&](CLI::App* parent, const std::string& sub, const std::string& help, const std::string& name,
                  const std::string& figure = "") -> Command& {
    Command& c = commands.emplace_back();
    c.name = name;
    c.figure = figure;
    c.app = parent->add_subcommand(sub, help);
    return c;
  };

  simulate_flags(make(&app, "simulate", "N-agent exchange simulation", "simulate"));

  add_flags(make(&app, "meanfield", "RK4 integration of the mean-field ODE", "meanfield"),
            {{"--initial", "initial", Kind::text, "initial pmf, e.g. dirac:5"},
             {"--k", "K", Kind::integer, "truncation index"},
             {"--dt", "dt", Kind::real, "RK4 step"},
             {"--t-end", "t_end", Kind::real, "horizon"},
             {"--snapshot-step", "snapshot_step", Kind::real, "time between snapshots"},
             kSeed});

  add_flags(make(&app, "couple", "shared-coin coupling ensemble", "couple"),
            {{"--initial", "initial", Kind::text, "initial pmf of X"},
             {"--lambda", "lambda", Kind::real, "Poisson rate of the equilibrium copy"},
             {"--m", "M", Kind::integer, "ensemble size"},
             {"--t-end", "t_end", Kind::real, "horizon"},
             {"--replicas", "replicas", Kind::integer, "independent replicas"},
             {"--grid-step", "grid_step", Kind::real, "recording grid step"},
             kSeed});

  add_flags(make(&app, "chain", "exact finite-N chain analysis", "chain"),
            {{"--n", "N", Kind::integer, "number of agents"},
             {"--total", "total", Kind::integer, "total wealth"},
             {"--dump-matrix", "dump_matrix", Kind::flag, "write matrix.csv"},
             kSeed});

  add_flags(make(&app, "laplace", "generating-function a-system", "laplace"),
            {{"--initial", "initial", Kind::text, "pmf whose generating function seeds a(0)"},
             {"--depth", "depth", Kind::integer, "truncation depth M"},
             {"--t-end", "t_end", Kind::real, "horizon"},
             {"--dt", "dt", Kind::real, "RK4 step"},
             {"--record-every", "record_every", Kind::integer, "steps between recorded states"},
             {"--mu-lo", "mu_lo", Kind::real, "lower envelope rate"},
             {"--mu-hi", "mu_hi", Kind::real, "upper envelope rate"},
             kSeed});

  add_flags(make(&app, "metrics", "distances between pmfs and decay fits", "metrics"),
            {{"--p", "p", Kind::text, "first pmf"},
             {"--q", "q", Kind::text, "second pmf"},
             {"--trace", "trace", Kind::text, "CSV t,value to fit"},
             {"--fit-start", "fit_start", Kind::real, "fit window start"},
             {"--fit-end", "fit_end", Kind::real, "fit window end"},
             kSeed});

  CLI::App* reproduce = app.add_subcommand("reproduce", "regenerate figure data");
  reproduce->require_subcommand(1);
  simulate_flags(make(reproduce, "fig1", "agent simulation against Poisson", "reproduce", "fig1"));
  add_flags(make(reproduce, "fig4", "mean-field from a Dirac start", "reproduce", "fig4"),
            {{"--lambda", "lambda", Kind::real, "mean wealth (integer)"},
             {"--k", "K", Kind::integer, "truncation index"},
             {"--dt", "dt", Kind::real, "RK4 step"},
             {"--t-end", "t_end", Kind::real, "horizon"},
             {"--snapshot-step", "snapshot_step", Kind::real, "time between snapshots"},
             kSeed});
  add_flags(make(reproduce, "fig5", "W1/W2 decay traces and fits", "reproduce", "fig5"),
            {{"--initial", "initial", Kind::text, "initial pmf"},
             {"--k", "K", Kind::integer, "truncation index"},
             {"--dt", "dt", Kind::real, "RK4 step"},
             {"--t-end", "t_end", Kind::real, "horizon"},
             {"--trace-step", "trace_step", Kind::real, "time between trace points"},
             {"--fit-start", "fit_start", Kind::real, "fit window start"},
             {"--fit-end", "fit_end", Kind::real, "fit window end"},
             kSeed});

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail_usage(e.what());
  }

  for (Command& c : commands)
    if (c.app->parsed()) return execute(c);
  return fail_usage("no subcommand given");
}
