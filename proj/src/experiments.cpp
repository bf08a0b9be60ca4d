#include "kinex/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>

#include "kinex/agent_sim.hpp"
#include "kinex/coupling.hpp"
#include "kinex/error.hpp"
#include "kinex/exact_chain.hpp"
#include "kinex/laplace.hpp"
#include "kinex/meanfield.hpp"
#include "kinex/metrics.hpp"

namespace fs = std::filesystem;

namespace kinex {

std::string Violation::message() const { return field + ": " + constraint + " (got " + value + ")"; }

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

double number(const std::string& s, const std::string& whole) {
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || r.ec != std::errc() || r.ptr != s.data() + s.size())
    fail(ErrorKind::parameter, "bad number '" + s + "' in '" + whole + "'");
  return v;
}

std::size_t index(const std::string& s, const std::string& whole) {
  const double v = number(s, whole);
  if (!(v >= 0.0) || v != std::floor(v) || v > 1e9)
    fail(ErrorKind::parameter, "'" + s + "' in '" + whole + "' must be a nonnegative integer");
  return static_cast<std::size_t>(v);
}

}  // namespace

Pmf parse_pmf(const std::string& text) {
  const auto parts = split(text, ':');
  const std::string& kind = parts.empty() ? text : parts[0];
  if (kind == "dirac" && parts.size() == 2) return Pmf::dirac(index(parts[1], text));
  if (kind == "poisson" && (parts.size() == 2 || parts.size() == 3)) {
    const double lambda = number(parts[1], text);
    if (!(lambda > 0.0)) fail(ErrorKind::parameter, "poisson rate must be positive in '" + text + "'");
    return poisson_pmf(lambda, parts.size() == 3 ? index(parts[2], text) : default_truncation(lambda));
  }
  if (kind == "binomial" && parts.size() == 3) {
    const double g = number(parts[2], text);
    if (!(g >= 0.0 && g <= 1.0)) fail(ErrorKind::parameter, "binomial gamma must lie in [0,1] in '" + text + "'");
    return binomial_pmf(index(parts[1], text), g);
  }
  if ((kind == "uniform" && parts.size() == 3) || (kind == "tilted" && parts.size() == 4)) {
    const std::size_t a = index(parts[1], text), b = index(parts[2], text);
    if (a > b) fail(ErrorKind::parameter, "need a <= b in '" + text + "'");
    std::vector<double> w(b + 1, 0.0);
    const double mass = 1.0 / static_cast<double>(b - a + 1);
    for (std::size_t k = a; k <= b; ++k) w[k] = mass;
    if (kind == "tilted") {
      const double eps = number(parts[3], text);
      if (!(eps >= 0.0 && eps <= mass)) fail(ErrorKind::parameter, "tilt must lie in [0, 1/(b-a+1)] in '" + text + "'");
      w[a] -= eps;
      w[b] += eps;
    }
    return Pmf(std::move(w));
  }
  if (kind == "custom" && parts.size() == 2) {
    std::vector<double> w;
    for (const auto& item : split(parts[1], ',')) w.push_back(number(item, text));
    if (w.empty()) fail(ErrorKind::parameter, "custom pmf needs weights");
    Pmf p(std::move(w));
    if (!p.normalized()) fail(ErrorKind::parameter, "custom pmf weights must sum to 1 in '" + text + "'");
    return p;
  }
  fail(ErrorKind::parameter, "unrecognized pmf '" + text +
                                 "' (dirac:k | poisson:l[:K] | binomial:n:g | uniform:a:b | tilted:a:b:eps | custom:w0,w1,...)");
}

namespace {

enum class Type { integer, real, string, boolean };

struct Field {
  std::string name;
  Type type;
  Json def;
  bool nullable = false;
};

using Schema = std::vector<Field>;
using Violations = std::vector<Violation>;

Schema simulate_schema(std::int64_t N, std::int64_t events, std::int64_t every, std::int64_t seed) {
  return {{"N", Type::integer, N},
          {"rule", Type::string, "binomial"},
          {"s", Type::real, nullptr, true},
          {"initial", Type::string, "uniform:0:10"},
          {"seed", Type::integer, seed},
          {"events", Type::integer, events},
          {"snapshot_every", Type::integer, every},
          {"time_convention", Type::string, "discrete"}};
}

const std::map<std::string, Schema>& schemas() {
  static const std::map<std::string, Schema> s = [] {
    std::map<std::string, Schema> m;
    m["simulate"] = simulate_schema(1000, 1'000'000, 100'000, 1);
    m["meanfield"] = {{"initial", Type::string, "dirac:5"}, {"K", Type::integer, nullptr, true},
                      {"dt", Type::real, 0.01},             {"t_end", Type::real, 1.5},
                      {"snapshot_step", Type::real, 0.1},   {"seed", Type::integer, 1}};
    m["couple"] = {{"initial", Type::string, "dirac:5"}, {"lambda", Type::real, nullptr, true},
                   {"M", Type::integer, 100'000},        {"t_end", Type::real, 20.0},
                   {"replicas", Type::integer, 32},      {"grid_step", Type::real, 0.25},
                   {"seed", Type::integer, 1}};
    m["chain"] = {{"N", Type::integer, 3},
                  {"total", Type::integer, 6},
                  {"dump_matrix", Type::boolean, false},
                  {"seed", Type::integer, 1}};
    m["laplace"] = {{"initial", Type::string, "dirac:5"}, {"depth", Type::integer, 24},
                    {"t_end", Type::real, 40.0},          {"dt", Type::real, 0.01},
                    {"record_every", Type::integer, 100}, {"mu_lo", Type::real, nullptr, true},
                    {"mu_hi", Type::real, nullptr, true}, {"seed", Type::integer, 1}};
    m["metrics"] = {{"p", Type::string, "dirac:5"},
                    {"q", Type::string, "poisson:5"},
                    {"trace", Type::string, nullptr, true},
                    {"fit_start", Type::real, nullptr, true},
                    {"fit_end", Type::real, nullptr, true},
                    {"seed", Type::integer, 1}};
    m["reproduce/fig1"] = simulate_schema(10'000, 10'000'000, 1'000'000, 7);
    m["reproduce/fig4"] = {{"lambda", Type::real, 5.0}, {"K", Type::integer, 60, true},
                           {"dt", Type::real, 0.01},    {"t_end", Type::real, 1.5},
                           {"snapshot_step", Type::real, 0.1}, {"seed", Type::integer, 1}};
    m["reproduce/fig5"] = {{"initial", Type::string, "tilted:0:10:0.015"},
                           {"K", Type::integer, 55},
                           {"dt", Type::real, 0.01},
                           {"t_end", Type::real, 8.0},
                           {"trace_step", Type::real, 0.05},
                           {"fit_start", Type::real, 0.5},
                           {"fit_end", Type::real, nullptr, true},
                           {"seed", Type::integer, 1}};
    for (auto& [key, schema] : m)
      if (key.rfind("reproduce/", 0) == 0) schema.push_back({"figure", Type::string, key.substr(10)});
    return m;
  }();
  return s;
}

const char* type_name(Type t) {
  switch (t) {
    case Type::integer: return "an integer";
    case Type::real: return "a number";
    case Type::string: return "a string";
    case Type::boolean: return "a boolean";
  }
  return "?";
}

bool has_type(const Json& v, Type t) {
  switch (t) {
    case Type::integer: return v.is_number_integer();
    case Type::real: return v.is_number();
    case Type::string: return v.is_string();
    case Type::boolean: return v.is_boolean();
  }
  return false;
}

std::string show(const Json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

// Manifests carry the config under "config".
Json unwrap(const std::string& command, const Json& cfg, Violations& out) {
  if (cfg.is_object() && cfg.contains("config") && cfg.contains("artifacts")) {
    if (cfg.contains("command") && cfg["command"] != command)
      out.push_back({"command", "manifest was written by '" + show(cfg["command"]) + "'", command});
    return cfg["config"];
  }
  return cfg;
}

std::optional<std::string> schema_key(const std::string& command, const Json& cfg, Violations& out) {
  if (command == "reproduce") {
    const Json fig = cfg.is_object() && cfg.contains("figure") ? cfg["figure"] : Json();
    if (fig == "fig1" || fig == "fig4" || fig == "fig5") return "reproduce/" + fig.get<std::string>();
    out.push_back({"figure", "one of fig1, fig4, fig5", fig.is_null() ? "nothing" : show(fig)});
    return std::nullopt;
  }
  if (schemas().count(command)) return command;
  out.push_back({"command", "one of simulate, meanfield, couple, chain, laplace, metrics, reproduce", command});
  return std::nullopt;
}

// Defaults merged in; unknown fields and type mismatches reported.
std::optional<Json> merge(const std::string& key, const Json& cfg, Violations& out) {
  if (!cfg.is_object()) {
    out.push_back({"config", "must be a JSON object", show(cfg)});
    return std::nullopt;
  }
  const Schema& schema = schemas().at(key);
  for (const auto& [name, value] : cfg.items()) {
    const bool known = std::any_of(schema.begin(), schema.end(), [&](const Field& f) { return f.name == name; });
    if (!known) out.push_back({name, "unknown field", show(value)});
  }
  // Unknown fields do not block the semantic checks; type errors do.
  const std::size_t before = out.size();
  Json merged = Json::object();
  for (const Field& f : schema) {
    const Json v = cfg.contains(f.name) ? cfg[f.name] : f.def;
    if (!(v.is_null() && f.nullable) && !has_type(v, f.type))
      out.push_back({f.name, std::string("must be ") + type_name(f.type) + (f.nullable ? " or null" : ""), show(v)});
    merged[f.name] = v;
  }
  if (out.size() != before) return std::nullopt;
  return merged;
}

std::int64_t as_int(const Json& c, const char* k) { return c[k].get<std::int64_t>(); }
double as_real(const Json& c, const char* k) { return c[k].get<double>(); }
std::string as_str(const Json& c, const char* k) { return c[k].get<std::string>(); }
std::optional<double> opt_real(const Json& c, const char* k) {
  return c[k].is_null() ? std::nullopt : std::optional<double>(c[k].get<double>());
}

void require(Violations& out, bool ok, const char* field, const std::string& constraint, const Json& value) {
  if (!ok) out.push_back({field, constraint, show(value)});
}

std::optional<Pmf> checked_pmf(const Json& c, const char* field, Violations& out) {
  try {
    Pmf p = parse_pmf(as_str(c, field));
    if (!p.normalized()) {
      out.push_back({field, "normalized distribution", c[field].get<std::string>()});
      return std::nullopt;
    }
    return p;
  } catch (const Error& e) {
    out.push_back({field, e.what(), c[field].get<std::string>()});
    return std::nullopt;
  }
}

void check_seed(const Json& c, Violations& out) {
  require(out, c["seed"].is_number_unsigned() || as_int(c, "seed") >= 0, "seed", "seed >= 0", c["seed"]);
}

void check_step(const Json& c, const char* field, Violations& out) {
  const double dt = as_real(c, field);
  require(out, dt > 0.0 && dt <= 0.1, field, std::string(field) + " in (0, 0.1]", c[field]);
}

void check_simulate(const Json& c, Violations& out) {
  const std::int64_t N = as_int(c, "N");
  require(out, N >= 2, "N", "N >= 2", c["N"]);
  require(out, N <= 100'000'000, "N", "N <= 100000000", c["N"]);
  require(out, as_int(c, "events") >= 1, "events", "events >= 1", c["events"]);
  require(out, as_int(c, "snapshot_every") >= 1, "snapshot_every", "snapshot_every >= 1", c["snapshot_every"]);
  check_seed(c, out);
  const std::string tc = as_str(c, "time_convention");
  require(out, tc == "discrete" || tc == "poisson_clock", "time_convention", "discrete or poisson_clock", c["time_convention"]);

  std::optional<ExchangeRule> rule;
  const std::string name = as_str(c, "rule");
  const auto s = opt_real(c, "s");
  if (name != "binomial" && name != "uniform" && name != "repeated_average" && name != "saving") {
    out.push_back({"rule", "one of binomial, uniform, repeated_average, saving", name});
  } else if (name == "saving" && !s) {
    out.push_back({"s", "required when rule = saving", "null"});
  } else if (name != "saving" && s) {
    out.push_back({"s", "only allowed with rule = saving", show(c["s"])});
  } else if (s && !(*s >= 0.0 && *s <= 1.0)) {
    out.push_back({"s", "s in [0, 1]", show(c["s"])});
  } else {
    rule = ExchangeRule::parse(name, s);
  }

  try {
    const InitialCondition ic = InitialCondition::parse(as_str(c, "initial"));
    if (rule && N >= 2 && N <= 100'000'000) (void)ic.materialize(static_cast<std::size_t>(N), rule->integer_valued());
  } catch (const Error& e) {
    out.push_back({"initial", e.what(), as_str(c, "initial")});
  }
}

void check_meanfield(const Json& c, Violations& out) {
  check_seed(c, out);
  check_step(c, "dt", out);
  require(out, as_real(c, "t_end") > 0.0, "t_end", "t_end > 0", c["t_end"]);
  require(out, as_real(c, "snapshot_step") > 0.0, "snapshot_step", "snapshot_step > 0", c["snapshot_step"]);
  const auto p0 = checked_pmf(c, "initial", out);
  if (!p0) return;
  if (c["K"].is_null()) {
    require(out, mean(*p0) > 0.0, "initial", "mean > 0 to derive K", c["initial"]);
    if (mean(*p0) > 0.0) {
      try {
        (void)default_truncation(mean(*p0));
      } catch (const Error& e) {
        out.push_back({"K", e.what(), "null"});
      }
    }
  } else {
    const std::int64_t K = as_int(c, "K");
    require(out, K >= 1 && K <= static_cast<std::int64_t>(kMaxTruncation), "K", "1 <= K <= 512", c["K"]);
    require(out, K >= static_cast<std::int64_t>(p0->max_index()), "K",
            "K >= largest index of the initial pmf (" + std::to_string(p0->max_index()) + ")", c["K"]);
  }
}

void check_couple(const Json& c, Violations& out) {
  check_seed(c, out);
  const std::int64_t M = as_int(c, "M");
  require(out, M >= 2 && M <= 100'000'000, "M", "2 <= M <= 100000000", c["M"]);
  const std::int64_t R = as_int(c, "replicas");
  require(out, R >= 1 && R <= 4096, "replicas", "1 <= replicas <= 4096", c["replicas"]);
  require(out, as_real(c, "t_end") > 0.0, "t_end", "t_end > 0", c["t_end"]);
  require(out, as_real(c, "grid_step") > 0.0, "grid_step", "grid_step > 0", c["grid_step"]);
  const auto p0 = checked_pmf(c, "initial", out);
  const auto lambda = opt_real(c, "lambda");
  if (lambda) require(out, *lambda > 0.0, "lambda", "lambda > 0", c["lambda"]);
  if (p0 && lambda && *lambda > 0.0)
    require(out, std::abs(mean(*p0) - *lambda) <= 1e-6, "lambda",
            "lambda = mean(initial) = " + format_double(mean(*p0)), c["lambda"]);
  if (p0 && !lambda) require(out, mean(*p0) > 0.0, "initial", "mean > 0", c["initial"]);
}

void check_chain(const Json& c, Violations& out) {
  check_seed(c, out);
  const std::int64_t N = as_int(c, "N"), total = as_int(c, "total");
  require(out, N >= 2, "N", "N >= 2", c["N"]);
  require(out, total >= 0, "total", "total >= 0", c["total"]);
  if (N >= 2 && total >= 0 && N <= 1'000'000 && total <= 1'000'000) {
    const std::uint64_t count = composition_count(static_cast<std::uint32_t>(N), static_cast<std::uint32_t>(total));
    require(out, count <= kMaxChainStates, "state_space", "C(total+N-1, N-1) <= 2000000", std::to_string(count));
  } else if (N > 1'000'000 || total > 1'000'000) {
    out.push_back({"state_space", "C(total+N-1, N-1) <= 2000000", "overflow"});
  }
}

void check_laplace(const Json& c, Violations& out) {
  check_seed(c, out);
  const auto p0 = checked_pmf(c, "initial", out);
  const std::int64_t depth = as_int(c, "depth");
  require(out, depth >= 1 && depth <= 1000, "depth", "1 <= depth <= 1000", c["depth"]);
  require(out, as_real(c, "t_end") > 0.0, "t_end", "t_end > 0", c["t_end"]);
  check_step(c, "dt", out);
  require(out, as_int(c, "record_every") >= 1, "record_every", "record_every >= 1", c["record_every"]);
  const auto lo = opt_real(c, "mu_lo"), hi = opt_real(c, "mu_hi");
  if (lo) require(out, *lo >= 0.0, "mu_lo", "mu_lo >= 0", c["mu_lo"]);
  if (lo && hi) require(out, *lo <= *hi, "mu_hi", "mu_hi >= mu_lo", c["mu_hi"]);
  (void)p0;
}

void check_metrics(const Json& c, Violations& out) {
  check_seed(c, out);
  (void)checked_pmf(c, "p", out);
  (void)checked_pmf(c, "q", out);
  const auto a = opt_real(c, "fit_start"), b = opt_real(c, "fit_end");
  if ((a || b) && c["trace"].is_null()) out.push_back({"trace", "required when a fit window is given", "null"});
  if (a && b) require(out, *a < *b, "fit_end", "fit_end > fit_start", c["fit_end"]);
  if (!c["trace"].is_null()) {
    const fs::path path = as_str(c, "trace");
    std::error_code ec;
    require(out, fs::is_regular_file(path, ec), "trace", "readable file", c["trace"]);
  }
}

void check_fig4(const Json& c, Violations& out) {
  check_seed(c, out);
  check_step(c, "dt", out);
  const double lambda = as_real(c, "lambda");
  require(out, lambda > 0.0, "lambda", "lambda > 0", c["lambda"]);
  require(out, lambda == std::floor(lambda) && lambda <= 400, "lambda", "integer lambda <= 400 (start is dirac at lambda)",
          c["lambda"]);
  require(out, as_real(c, "t_end") > 0.0, "t_end", "t_end > 0", c["t_end"]);
  require(out, as_real(c, "snapshot_step") > 0.0, "snapshot_step", "snapshot_step > 0", c["snapshot_step"]);
  if (!c["K"].is_null()) {
    const std::int64_t K = as_int(c, "K");
    require(out, K >= 1 && K <= static_cast<std::int64_t>(kMaxTruncation), "K", "1 <= K <= 512", c["K"]);
    if (lambda > 0.0 && lambda == std::floor(lambda))
      require(out, static_cast<double>(K) >= lambda, "K", "K >= lambda", c["K"]);
  }
}

void check_fig5(const Json& c, Violations& out) {
  check_seed(c, out);
  check_step(c, "dt", out);
  const auto p0 = checked_pmf(c, "initial", out);
  const std::int64_t K = as_int(c, "K");
  require(out, K >= 1 && K <= static_cast<std::int64_t>(kMaxTruncation), "K", "1 <= K <= 512", c["K"]);
  if (p0) {
    require(out, K >= static_cast<std::int64_t>(p0->max_index()), "K", "K >= largest index of the initial pmf", c["K"]);
    require(out, mean(*p0) > 0.0, "initial", "mean > 0", c["initial"]);
  }
  const double t_end = as_real(c, "t_end"), a = as_real(c, "fit_start");
  require(out, t_end > 0.0, "t_end", "t_end > 0", c["t_end"]);
  require(out, as_real(c, "trace_step") > 0.0, "trace_step", "trace_step > 0", c["trace_step"]);
  require(out, a > 0.0 && a < t_end, "fit_start", "0 < fit_start < t_end", c["fit_start"]);
  if (const auto b = opt_real(c, "fit_end")) require(out, *b > a && *b <= t_end, "fit_end", "fit_start < fit_end <= t_end", c["fit_end"]);
}

void check(const std::string& key, const Json& c, Violations& out) {
  if (key == "simulate" || key == "reproduce/fig1") return check_simulate(c, out);
  if (key == "meanfield") return check_meanfield(c, out);
  if (key == "couple") return check_couple(c, out);
  if (key == "chain") return check_chain(c, out);
  if (key == "laplace") return check_laplace(c, out);
  if (key == "metrics") return check_metrics(c, out);
  if (key == "reproduce/fig4") return check_fig4(c, out);
  if (key == "reproduce/fig5") return check_fig5(c, out);
}

struct Checked {
  std::optional<std::string> key;
  Json config;
  Violations violations;
};

Checked check_all(const std::string& command, const Json& raw) {
  Checked r;
  const Json cfg = unwrap(command, raw, r.violations);
  r.key = schema_key(command, cfg, r.violations);
  if (!r.key) return r;
  const auto merged = merge(*r.key, cfg, r.violations);
  if (!merged) return r;
  r.config = *merged;
  check(*r.key, r.config, r.violations);
  return r;
}

// Derived defaults written back so that the manifest is self-contained.
void derive(const std::string& key, Json& c) {
  if (key == "meanfield" && c["K"].is_null()) {
    const Pmf p0 = parse_pmf(as_str(c, "initial"));
    c["K"] = std::max(default_truncation(mean(p0)), p0.max_index());
  } else if (key == "couple" && c["lambda"].is_null()) {
    c["lambda"] = mean(parse_pmf(as_str(c, "initial")));
  } else if (key == "laplace") {
    const double m = mean(parse_pmf(as_str(c, "initial")));
    if (c["mu_lo"].is_null()) c["mu_lo"] = std::max(0.0, m - 1.0);
    if (c["mu_hi"].is_null()) c["mu_hi"] = std::max(as_real(c, "mu_lo"), m + 1.0);
  } else if (key == "reproduce/fig4" && c["K"].is_null()) {
    c["K"] = std::max<std::size_t>(default_truncation(as_real(c, "lambda")),
                                   static_cast<std::size_t>(as_real(c, "lambda")));
  } else if (key == "reproduce/fig5" && c["fit_end"].is_null()) {
    c["fit_end"] = as_real(c, "t_end");
  } else if (key == "metrics" && !c["trace"].is_null()) {
    if (c["fit_start"].is_null() || c["fit_end"].is_null()) {
      const TraceSeries s = read_trace_csv(as_str(c, "trace"));
      if (s.size() == 0) fail(ErrorKind::validation, "trace: at least ten points (got 0)");
      if (c["fit_start"].is_null()) c["fit_start"] = s.times.front();
      if (c["fit_end"].is_null()) c["fit_end"] = s.times.back();
    }
  }
}

std::string joined(const Violations& v) {
  std::string s;
  for (const auto& x : v) s += (s.empty() ? "" : "; ") + x.message();
  return s;
}

// ---- runners ----

class Artifacts {
 public:
  explicit Artifacts(fs::path dir) : dir_(std::move(dir)) {}
  fs::path add(const std::string& name) {
    names_.push_back(name);
    return dir_ / name;
  }
  Json checksums() const {
    Json j = Json::object();
    for (const auto& n : names_) j[n] = sha256_file(dir_ / n);
    return j;
  }

 private:
  fs::path dir_;
  std::vector<std::string> names_;
};

std::optional<Pmf> poisson_reference(double lambda) {
  if (!(lambda > 0.0)) return std::nullopt;
  try {
    return poisson_pmf(lambda, default_truncation(lambda));
  } catch (const Error&) {
    return std::nullopt;
  }
}

Json maybe(std::optional<double> v) { return v ? Json(*v) : Json(nullptr); }

SimConfig sim_config(const Json& c) {
  SimConfig sc;
  sc.N = static_cast<std::size_t>(as_int(c, "N"));
  sc.rule = ExchangeRule::parse(as_str(c, "rule"), opt_real(c, "s"));
  sc.initial = InitialCondition::parse(as_str(c, "initial"));
  sc.seed = c["seed"].get<std::uint64_t>();
  sc.events = c["events"].get<std::uint64_t>();
  sc.snapshot_every = c["snapshot_every"].get<std::uint64_t>();
  sc.time_convention = as_str(c, "time_convention") == "poisson_clock" ? TimeConvention::poisson_clock : TimeConvention::discrete;
  return sc;
}

struct SimOutcome {
  SimResult result;
  std::optional<Pmf> reference;
  double total_initial = 0.0;
};

SimOutcome run_simulate(const Json& c, Artifacts& art) {
  const SimConfig sc = sim_config(c);
  SimOutcome o{run(sc), std::nullopt, 0.0};
  o.total_initial = sc.initial.materialize(sc.N, sc.rule.integer_valued()).total();
  o.reference = poisson_reference(o.result.snapshots.front().mean);

  CsvWriter csv(art.add("snapshots.csv"), {"event", "t_model", "n", "count"});
  Json snaps = Json::array();
  for (const Snapshot& s : o.result.snapshots) {
    for (std::size_t n = 0; n < s.counts.size(); ++n) csv.row(s.event, s.t_model, n, s.counts[n]);
    Json j{{"event", s.event}, {"t_model", s.t_model}, {"mean", s.mean}, {"variance", s.variance}, {"gini", s.gini}};
    std::optional<double> w1, w2;
    if (o.reference) {
      const Pmf emp = s.empirical_pmf();
      w1 = wasserstein(emp, *o.reference, 1);
      w2 = wasserstein(emp, *o.reference, 2);
    }
    j["W1_to_poisson"] = maybe(w1);
    j["W2_to_poisson"] = maybe(w2);
    snaps.push_back(j);
  }
  csv.close();
  const WealthState& fin = o.result.final_state;
  const bool conserved = fin.integer_valued() ? fin.integer_total() == static_cast<std::int64_t>(o.total_initial)
                                              : std::abs(fin.total() - o.total_initial) <= 1e-9 * static_cast<double>(fin.size());
  write_json(art.add("summary.json"), Json{{"rule", sc.rule.name()},
                                           {"N", sc.N},
                                           {"events", sc.events},
                                           {"snapshots", snaps},
                                           {"total_initial", o.total_initial},
                                           {"total_final", fin.total()},
                                           {"conserved", conserved}});
  return o;
}

void run_fig1(const Json& c, Artifacts& art) {
  const SimOutcome o = run_simulate(c, art);
  const Snapshot& last = o.result.snapshots.back();
  const Pmf emp = last.empirical_pmf();
  Json report{{"initial_mean", o.result.snapshots.front().mean}, {"events", last.event}};
  if (o.reference) {
    const Pmf& ref = *o.reference;
    CsvWriter csv(art.add("comparison.csv"), {"n", "empirical", "poisson"});
    for (std::size_t n = 0; n < std::max(emp.size(), ref.size()); ++n) csv.row(n, emp[n], ref[n]);
    csv.close();
    const double w1 = wasserstein(emp, ref, 1);
    report["W1"] = w1;
    report["W2"] = wasserstein(emp, ref, 2);
    report["TV"] = total_variation(emp, ref);
    report["W1_below_0.1"] = w1 < 0.1;
  }
  const WealthState& fin = o.result.final_state;
  report["total_initial"] = o.total_initial;
  report["total_final"] = fin.total();
  report["conserved"] = fin.integer_valued() && fin.integer_total() == static_cast<std::int64_t>(o.total_initial);
  write_json(art.add("poisson_comparison.json"), report);
}

Trajectory run_ode(const Pmf& p0, std::size_t K, double dt, double t_end, double step) {
  OdeConfig oc;
  oc.K = K;
  oc.dt = dt;
  oc.t_end = t_end;
  oc.snapshot_times = uniform_grid(t_end, step);
  return integrate(p0, oc);
}

Json distance_summary(const Trajectory& traj, const Pmf& ref, std::size_t K, double lambda) {
  Json s = trajectory_summary(traj);
  Json w1 = Json::array(), w2 = Json::array(), forecast = Json::array();
  const double m2_0 = second_moment(traj.states.front());
  for (std::size_t i = 0; i < traj.size(); ++i) {
    w1.push_back(wasserstein(traj.states[i], ref, 1));
    w2.push_back(wasserstein(traj.states[i], ref, 2));
    forecast.push_back(second_moment_forecast(lambda, m2_0, traj.times[i]));
  }
  s["W1_to_poisson"] = w1;
  s["W2_to_poisson"] = w2;
  s["second_moment_forecast"] = forecast;
  s["K"] = K;
  s["lambda"] = lambda;
  return s;
}

void run_meanfield(const Json& c, Artifacts& art) {
  const Pmf p0 = parse_pmf(as_str(c, "initial"));
  const auto K = static_cast<std::size_t>(as_int(c, "K"));
  const Trajectory traj = run_ode(p0, K, as_real(c, "dt"), as_real(c, "t_end"), as_real(c, "snapshot_step"));
  write_trajectory_csv(art.add("trajectory.csv"), traj);
  const double lambda = mean(p0);
  const auto ref = poisson_reference(lambda);
  Json s = ref ? distance_summary(traj, *ref, K, lambda) : trajectory_summary(traj);
  write_json(art.add("summary.json"), s);
}

void run_fig4(const Json& c, Artifacts& art) {
  const double lambda = as_real(c, "lambda");
  const auto K = static_cast<std::size_t>(as_int(c, "K"));
  const Trajectory traj =
      run_ode(Pmf::dirac(static_cast<std::size_t>(lambda)), K, as_real(c, "dt"), as_real(c, "t_end"), as_real(c, "snapshot_step"));
  write_trajectory_csv(art.add("trajectory.csv"), traj);
  const Pmf ref = poisson_pmf(lambda, default_truncation(lambda));
  const Pmf& last = traj.states.back();
  CsvWriter csv(art.add("comparison.csv"), {"n", "p_n", "poisson"});
  for (std::size_t n = 0; n < std::max(last.size(), ref.size()); ++n) csv.row(n, last[n], ref[n]);
  csv.close();
  Json s = distance_summary(traj, ref, K, lambda);
  const double w2 = wasserstein(last, ref, 2);
  s["W2_final"] = w2;
  s["W1_final"] = wasserstein(last, ref, 1);
  s["t_final"] = traj.times.back();
  s["W2_below_0.05"] = w2 < 0.05;
  write_json(art.add("summary.json"), s);
}

void run_fig5(const Json& c, Artifacts& art) {
  const Pmf p0 = parse_pmf(as_str(c, "initial"));
  const auto K = static_cast<std::size_t>(as_int(c, "K"));
  const double lambda = mean(p0);
  const Trajectory traj = run_ode(p0, K, as_real(c, "dt"), as_real(c, "t_end"), as_real(c, "trace_step"));
  const Pmf ref = poisson_pmf(lambda, K);
  TraceSeries w1{traj.times, {}, "W1"}, w2{traj.times, {}, "W2"};
  for (const Pmf& p : traj.states) {
    w1.values.push_back(wasserstein(p, ref, 1));
    w2.values.push_back(wasserstein(p, ref, 2));
  }
  write_trace_csv(art.add("w1.csv"), w1);
  write_trace_csv(art.add("w2.csv"), w2);

  const double a = as_real(c, "fit_start"), b = as_real(c, "fit_end");
  const double eps = 1e-9 * std::max(1.0, b);
  auto in_window = [&](double t) { return t >= a - eps && t <= b + eps; };
  auto monotone = [&](const TraceSeries& s) {
    std::optional<double> prev;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (!in_window(s.times[i])) continue;
      if (prev && !(s.values[i] < *prev)) return false;
      prev = s.values[i];
    }
    return true;
  };
  std::optional<double> w2_start;
  for (std::size_t i = 0; i < w2.size() && !w2_start; ++i)
    if (in_window(w2.times[i])) w2_start = w2.values[i] * std::sqrt(w2.times[i]);
  const double C = 1.05 * w2_start.value_or(0.0);
  bool envelope = true;
  for (std::size_t i = 0; i < w2.size(); ++i)
    if (in_window(w2.times[i]) && w2.values[i] > C / std::sqrt(w2.times[i])) envelope = false;

  write_json(art.add("fit.json"), Json{{"lambda", lambda},
                                       {"K", K},
                                       {"window", {a, b}},
                                       {"W1", fit_to_json(fit_decay(w1, a, b))},
                                       {"W2", fit_to_json(fit_decay(w2, a, b))},
                                       {"W1_monotone", monotone(w1)},
                                       {"W2_monotone", monotone(w2)},
                                       {"envelope_C", C},
                                       {"W2_within_envelope", envelope}});
}

void run_couple(const Json& c, Artifacts& art) {
  const Pmf p0 = parse_pmf(as_str(c, "initial"));
  const CouplingSummary s =
      run_coupling_replicas(p0, as_real(c, "lambda"), static_cast<std::size_t>(as_int(c, "M")), as_real(c, "t_end"),
                            c["seed"].get<std::uint64_t>(), static_cast<std::size_t>(as_int(c, "replicas")),
                            as_real(c, "grid_step"));
  CsvWriter csv(art.add("coupling.csv"), {"t", "D_mean", "D_stderr", "bound_value"});
  for (std::size_t k = 0; k < s.times.size(); ++k) csv.row(s.times[k], s.d_mean[k], s.d_stderr[k], s.bound[k]);
  csv.close();

  std::optional<std::size_t> cross;
  for (std::size_t k = 0; k < s.times.size() && !cross; ++k)
    if (s.d_mean[k] <= 1.0) cross = k;
  bool monotone = true, bounded = true;
  for (std::size_t k = 1; k < s.times.size(); ++k) {
    const double band = 3.0 * std::hypot(s.d_stderr[k], s.d_stderr[k - 1]);
    if (s.d_mean[k] > s.d_mean[k - 1] + band) monotone = false;
  }
  double worst = -INFINITY;
  if (cross) {
    for (std::size_t k = *cross; k < s.times.size(); ++k) {
      worst = std::max(worst, s.d_mean[k] - s.bound[k] - 3.0 * s.d_stderr[k]);
      if (s.d_mean[k] > s.bound[k] + 3.0 * s.d_stderr[k]) bounded = false;
    }
  }
  write_json(art.add("summary.json"), Json{{"D0", s.d_mean.front()},
                                           {"crossing_time", cross ? Json(s.times[*cross]) : Json(nullptr)},
                                           {"non_increasing_within_3sigma", monotone},
                                           {"below_envelope_after_crossing", cross ? Json(bounded) : Json(nullptr)},
                                           {"max_excess_over_envelope", cross ? Json(worst) : Json(nullptr)},
                                           {"replicas", s.replicas.size()},
                                           {"M", as_int(c, "M")}});
}

void run_chain(const Json& c, Artifacts& art) {
  const auto N = static_cast<std::uint32_t>(as_int(c, "N"));
  const auto total = static_cast<std::uint32_t>(as_int(c, "total"));
  const Chain chain = build_chain(N, total);
  const StationaryResult st = stationary(chain);
  const std::vector<double> mu = multinomial_law(chain.space);

  CsvWriter csv(art.add("stationary.csv"), {"row", "state", "pi", "multinomial"});
  double gap = 0.0;
  for (std::size_t r = 0; r < mu.size(); ++r) {
    std::string state;
    for (auto x : chain.space.state(r)) state += (state.empty() ? "" : " ") + std::to_string(x);
    csv.row(r, state, st.pi[r], mu[r]);
    gap = std::max(gap, std::abs(st.pi[r] - mu[r]));
  }
  csv.close();
  if (c["dump_matrix"].get<bool>()) {
    CsvWriter m(art.add("matrix.csv"), {"row", "col", "prob"});
    const TransitionMatrix& P = chain.matrix;
    for (std::size_t r = 0; r < P.rows(); ++r)
      for (std::size_t e = P.row_start[r]; e < P.row_start[r + 1]; ++e) m.row(r, P.col[e], P.prob[e]);
    m.close();
  }
  Json marg = Json::array();
  for (std::uint32_t n = 0; n <= total; ++n)
    marg.push_back(std::abs(marginal(chain.space, st.pi, 0, n) - binomial_marginal(N, total, n)));
  write_json(art.add("report.json"), Json{{"states", chain.space.size()},
                                          {"max_abs_gap", gap},
                                          {"detailed_balance_residual", detailed_balance_residual(chain)},
                                          {"marginal_gaps", marg},
                                          {"stationary_residual", st.residual},
                                          {"iterations", st.iterations}});
}

void run_laplace(const Json& c, Artifacts& art) {
  const Pmf p0 = parse_pmf(as_str(c, "initial"));
  const ASystemState a0 = from_pmf(p0, static_cast<std::size_t>(as_int(c, "depth")));
  const ASystemTrajectory traj =
      integrate_a_system(a0, as_real(c, "t_end"), as_real(c, "dt"), static_cast<std::size_t>(as_int(c, "record_every")));
  CsvWriter csv(art.add("a_system.csv"), {"t", "n", "a_n"});
  for (std::size_t i = 0; i < traj.size(); ++i)
    for (std::size_t n = 0; n < traj.states[i].a.size(); ++n) csv.row(traj.times[i], n, traj.states[i].a[n]);
  csv.close();
  const std::vector<double> gaps = limit_gaps(traj.states.back(), a0.mu);
  double worst = 0.0;
  for (std::size_t n = 0; n < gaps.size() && n <= 10; ++n) worst = std::max(worst, gaps[n]);
  write_json(art.add("report.json"), Json{{"mu", a0.mu},
                                          {"t_final", traj.times.back()},
                                          {"limit_gaps", gaps},
                                          {"max_limit_gap_n_le_10", worst},
                                          {"realized_mu", realized_mu(traj.states.back())},
                                          {"envelope", {as_real(c, "mu_lo"), as_real(c, "mu_hi")}},
                                          {"envelope_violations",
                                           envelope_violations(traj, as_real(c, "mu_lo"), as_real(c, "mu_hi"))}});
}

void run_metrics(const Json& c, Artifacts& art) {
  const Pmf p = parse_pmf(as_str(c, "p")), q = parse_pmf(as_str(c, "q"));
  Json report{{"W1", wasserstein(p, q, 1)}, {"W2", wasserstein(p, q, 2)}, {"TV", total_variation(p, q)}};
  if (!c["trace"].is_null()) {
    const TraceSeries s = read_trace_csv(as_str(c, "trace"));
    write_trace_csv(art.add("trace.csv"), s);
    report["fit"] = fit_to_json(fit_decay(s, as_real(c, "fit_start"), as_real(c, "fit_end")));
  }
  write_json(art.add("metrics.json"), report);
}

void prepare_output(const fs::path& dir, bool force) {
  std::error_code ec;
  if (fs::exists(dir, ec)) {
    if (!fs::is_directory(dir, ec)) fail(ErrorKind::validation, "output " + dir.string() + " exists and is not a directory");
    if (!fs::is_empty(dir, ec) && !force)
      fail(ErrorKind::validation, "output directory " + dir.string() + " is not empty; pass --force to overwrite");
  }
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorKind::io, "cannot create " + dir.string() + ": " + ec.message());
}

}  // namespace

std::vector<Violation> validate_config(const std::string& command, const Json& cfg) {
  return check_all(command, cfg).violations;
}

Json resolve_config(const std::string& command, const Json& cfg) {
  Checked r = check_all(command, cfg);
  if (!r.violations.empty()) fail(ErrorKind::validation, joined(r.violations));
  derive(*r.key, r.config);
  return r.config;
}

Json run_experiment(const std::string& command, const Json& cfg, const fs::path& out_dir, bool force) {
  const Json c = resolve_config(command, cfg);
  const std::string key = command == "reproduce" ? "reproduce/" + as_str(c, "figure") : command;
  prepare_output(out_dir, force);
  Artifacts art(out_dir);
  if (key == "simulate") (void)run_simulate(c, art);
  else if (key == "meanfield") run_meanfield(c, art);
  else if (key == "couple") run_couple(c, art);
  else if (key == "chain") run_chain(c, art);
  else if (key == "laplace") run_laplace(c, art);
  else if (key == "metrics") run_metrics(c, art);
  else if (key == "reproduce/fig1") run_fig1(c, art);
  else if (key == "reproduce/fig4") run_fig4(c, art);
  else if (key == "reproduce/fig5") run_fig5(c, art);

  Json manifest{{"command", command},
                {"config", c},
                {"seed", c["seed"]},
                {"artifacts", art.checksums()},
                {"version", kVersion}};
  write_json(out_dir / "manifest.json", manifest);
  return manifest;
}

}  // namespace kinex
