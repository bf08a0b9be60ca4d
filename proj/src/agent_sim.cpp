#include "kinex/agent_sim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <sstream>

#include "kinex/error.hpp"
#include "kinex/metrics.hpp"

namespace kinex {

namespace {

constexpr std::int64_t kMaxIntegerTotal = std::int64_t{1} << 62;

bool is_integral(double v) { return std::isfinite(v) && v == std::floor(v); }

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(item);
  return out;
}

double parse_number(const std::string& s, const std::string& context) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    fail(ErrorKind::parameter, "cannot parse number '" + s + "' in " + context);
  }
}

}  // namespace

ExchangeRule ExchangeRule::saving(double s) {
  if (!(s >= 0.0 && s <= 1.0)) fail(ErrorKind::parameter, "saving fraction s must lie in [0,1]");
  return ExchangeRule(RuleKind::saving, s);
}

ExchangeRule ExchangeRule::parse(const std::string& name, std::optional<double> s) {
  if (name == "saving") {
    if (!s) fail(ErrorKind::parameter, "saving rule needs the parameter s");
    return saving(*s);
  }
  if (s) fail(ErrorKind::parameter, "parameter s only applies to the saving rule");
  if (name == "binomial") return binomial();
  if (name == "uniform") return uniform();
  if (name == "repeated_average") return repeated_average();
  fail(ErrorKind::parameter, "unknown exchange rule '" + name + "'");
}

std::string ExchangeRule::name() const {
  switch (kind_) {
    case RuleKind::binomial: return "binomial";
    case RuleKind::uniform: return "uniform";
    case RuleKind::repeated_average: return "repeated_average";
    case RuleKind::saving: return "saving";
  }
  return "?";
}

WealthState WealthState::integers(std::vector<std::int64_t> values) {
  WealthState w;
  std::int64_t total = 0;
  for (std::int64_t v : values) {
    if (v < 0) fail(ErrorKind::parameter, "wealth must be nonnegative");
    if (__builtin_add_overflow(total, v, &total) || total > kMaxIntegerTotal)
      fail(ErrorKind::configuration, "total wealth overflows the 2^62 bound");
  }
  w.integer_total_ = total;
  w.total_ = static_cast<double>(total);
  w.values_ = std::move(values);
  return w;
}

WealthState WealthState::reals(std::vector<double> values) {
  WealthState w;
  double total = 0.0;
  for (double v : values) {
    if (!(v >= 0.0) || !std::isfinite(v)) fail(ErrorKind::parameter, "wealth must be finite and nonnegative");
    total += v;
  }
  w.total_ = total;
  w.values_ = std::move(values);
  return w;
}

std::size_t WealthState::size() const noexcept {
  return std::visit([](const auto& v) { return v.size(); }, values_);
}

std::span<const std::int64_t> WealthState::integer_values() const { return std::get<0>(values_); }
std::span<const double> WealthState::real_values() const { return std::get<1>(values_); }

double WealthState::value(std::size_t i) const {
  return std::visit([i](const auto& v) { return static_cast<double>(v[i]); }, values_);
}

std::vector<double> WealthState::as_doubles() const {
  return std::visit([](const auto& v) { return std::vector<double>(v.begin(), v.end()); }, values_);
}

void WealthState::verify_total() const {
  if (integer_valued()) {
    std::int64_t s = 0;
    for (std::int64_t v : integer_values()) s += v;
    if (s != integer_total_)
      fail(ErrorKind::numerical, "integer wealth not conserved: " + std::to_string(s) + " != " +
                                     std::to_string(integer_total_));
  } else {
    double s = 0.0;
    for (double v : real_values()) s += v;
    if (std::abs(s - total_) > 1e-9 * static_cast<double>(size()))
      fail(ErrorKind::numerical, "real wealth drifted by " + std::to_string(s - total_));
  }
}

std::int64_t sample_binomial_half(std::int64_t n, Rng& rng) {
  if (n < 0) fail(ErrorKind::parameter, "binomial count must be nonnegative");
  if (n == 0) return 0;
  if (n <= 64) return std::popcount(rng() >> (64 - n));
  std::binomial_distribution<std::int64_t> d(n, 0.5);
  return d(rng);
}

void exchange(WealthState& state, std::size_t i, std::size_t j, const ExchangeRule& rule, Rng& rng) {
  if (rule.integer_valued() != state.integer_valued())
    fail(ErrorKind::configuration, "rule '" + rule.name() + "' does not match the wealth value type");
  if (rule.kind() == RuleKind::binomial) {
    std::int64_t& a = state.integer_at(i);
    std::int64_t& b = state.integer_at(j);
    const std::int64_t pool = a + b;
    a = sample_binomial_half(pool, rng);
    b = pool - a;
    return;
  }
  double& a = state.real_at(i);
  double& b = state.real_at(j);
  const double pool = a + b;
  double na = 0.0;
  switch (rule.kind()) {
    case RuleKind::uniform: na = uniform01(rng) * pool; break;
    case RuleKind::repeated_average: na = 0.5 * pool; break;
    case RuleKind::saving: {
      const double s = *rule.s();
      na = uniform01(rng) * s * pool + (1.0 - s) * a;
      break;
    }
    case RuleKind::binomial: break;
  }
  double nb = pool - na;
  if (nb < 0.0) {
    na = pool;
    nb = 0.0;
  }
  a = na;
  b = nb;
}

PairChoice step(WealthState& state, const ExchangeRule& rule, Rng& rng) {
  if (state.size() < 2) fail(ErrorKind::configuration, "an exchange needs N >= 2 agents");
  const auto [i, j] = uniform_pair(rng, state.size());
  exchange(state, i, j, rule, rng);
  return {i, j};
}

InitialCondition InitialCondition::dirac(double k) {
  InitialCondition c;
  c.kind_ = Kind::dirac;
  c.a_ = k;
  return c;
}

InitialCondition InitialCondition::uniform_range(double a, double b) {
  InitialCondition c;
  c.kind_ = Kind::uniform_range;
  c.a_ = a;
  c.b_ = b;
  return c;
}

InitialCondition InitialCondition::custom(std::vector<double> values) {
  InitialCondition c;
  c.kind_ = Kind::custom;
  c.values_ = std::move(values);
  return c;
}

InitialCondition InitialCondition::parse(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.size() == 2 && parts[0] == "dirac") return dirac(parse_number(parts[1], text));
  if (parts.size() == 3 && parts[0] == "uniform")
    return uniform_range(parse_number(parts[1], text), parse_number(parts[2], text));
  if (parts.size() == 2 && parts[0] == "custom") {
    std::vector<double> v;
    for (const auto& item : split(parts[1], ',')) v.push_back(parse_number(item, text));
    return custom(std::move(v));
  }
  fail(ErrorKind::parameter, "unrecognized initial condition '" + text + "' (dirac:k | uniform:a:b | custom:x,y,...)");
}

std::string InitialCondition::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind_) {
    case Kind::dirac: os << "dirac:" << a_; break;
    case Kind::uniform_range: os << "uniform:" << a_ << ":" << b_; break;
    case Kind::custom:
      os << "custom:";
      for (std::size_t i = 0; i < values_.size(); ++i) os << (i ? "," : "") << values_[i];
      break;
  }
  return os.str();
}

WealthState InitialCondition::materialize(std::size_t N, bool integer_valued) const {
  std::vector<double> v(N);
  switch (kind_) {
    case Kind::dirac:
      if (!(a_ >= 0.0)) fail(ErrorKind::configuration, "dirac location must be nonnegative");
      std::fill(v.begin(), v.end(), a_);
      break;
    case Kind::uniform_range:
      if (!(a_ >= 0.0 && b_ >= a_)) fail(ErrorKind::configuration, "uniform range needs 0 <= a <= b");
      if (integer_valued) {
        if (!is_integral(a_) || !is_integral(b_))
          fail(ErrorKind::configuration, "integer rules need integer uniform range bounds");
        const auto width = static_cast<std::size_t>(b_ - a_) + 1;
        for (std::size_t i = 0; i < N; ++i) v[i] = a_ + static_cast<double>(i % width);
      } else {
        for (std::size_t i = 0; i < N; ++i)
          v[i] = N > 1 ? a_ + (b_ - a_) * static_cast<double>(i) / static_cast<double>(N - 1) : a_;
      }
      break;
    case Kind::custom:
      if (values_.size() != N)
        fail(ErrorKind::configuration, "custom initial condition has " + std::to_string(values_.size()) +
                                           " values for N=" + std::to_string(N));
      v = values_;
      break;
  }
  if (!integer_valued) return WealthState::reals(std::move(v));
  std::vector<std::int64_t> iv(N);
  for (std::size_t i = 0; i < N; ++i) {
    if (!is_integral(v[i]) || v[i] < 0.0 || v[i] > static_cast<double>(kMaxIntegerTotal))
      fail(ErrorKind::configuration, "binomial rule needs nonnegative integer initial wealth");
    iv[i] = static_cast<std::int64_t>(v[i]);
  }
  return WealthState::integers(std::move(iv));
}

std::vector<std::string> SimConfig::violations() const {
  std::vector<std::string> out;
  if (N < 2) out.push_back("N >= 2 (got " + std::to_string(N) + ")");
  if (events < 1) out.push_back("events >= 1 (got " + std::to_string(events) + ")");
  if (snapshot_every < 1) out.push_back("snapshot_every >= 1 (got " + std::to_string(snapshot_every) + ")");
  if (N >= 2) {
    try {
      (void)initial.materialize(N, rule.integer_valued());
    } catch (const Error& e) {
      out.push_back(std::string("initial condition: ") + e.what());
    }
  }
  return out;
}

Pmf Snapshot::empirical_pmf() const {
  std::uint64_t n = 0;
  for (auto c : counts) n += c;
  std::vector<double> w(counts.size());
  for (std::size_t k = 0; k < counts.size(); ++k) w[k] = static_cast<double>(counts[k]) / static_cast<double>(n);
  return Pmf(std::move(w));
}

Snapshot take_snapshot(const WealthState& state, std::uint64_t event, double t_model) {
  Snapshot s;
  s.event = event;
  s.t_model = t_model;
  const std::vector<double> x = state.as_doubles();
  const double n = static_cast<double>(x.size());
  double hi = 0.0, sum = 0.0;
  for (double v : x) {
    hi = std::max(hi, v);
    sum += v;
  }
  s.counts.assign(static_cast<std::size_t>(std::floor(hi)) + 1, 0);
  for (double v : x) ++s.counts[static_cast<std::size_t>(std::floor(v))];
  s.mean = sum / n;
  double ss = 0.0;
  for (double v : x) ss += (v - s.mean) * (v - s.mean);
  s.variance = ss / n;
  s.gini = sum > 0.0 ? gini(x) : 0.0;
  return s;
}

SimResult run(const SimConfig& cfg) {
  if (const auto v = cfg.violations(); !v.empty()) fail(ErrorKind::configuration, "invalid simulation config: " + v.front());
  WealthState state = cfg.initial.materialize(cfg.N, cfg.rule.integer_valued());
  Rng rng = make_rng(cfg.seed, cfg.replica);
  const double mean_dt = 2.0 / static_cast<double>(cfg.N);

  SimResult result{{}, state};
  double t = 0.0;
  result.snapshots.push_back(take_snapshot(state, 0, t));
  for (std::uint64_t e = 1; e <= cfg.events; ++e) {
    step(state, cfg.rule, rng);
    if (cfg.time_convention == TimeConvention::poisson_clock)
      t += exponential(rng, mean_dt);
    else
      t = static_cast<double>(e);
    if (e % cfg.snapshot_every == 0 || e == cfg.events) {
      state.verify_total();
      result.snapshots.push_back(take_snapshot(state, e, t));
    }
  }
  result.final_state = std::move(state);
  return result;
}

}  // namespace kinex
