#pragma once

// N-agent pairwise exchange simulator.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "kinex/pmf.hpp"
#include "kinex/rng.hpp"

namespace kinex {

enum class RuleKind { binomial, uniform, repeated_average, saving };

class ExchangeRule {
 public:
  static ExchangeRule binomial() { return ExchangeRule(RuleKind::binomial, std::nullopt); }
  static ExchangeRule uniform() { return ExchangeRule(RuleKind::uniform, std::nullopt); }
  static ExchangeRule repeated_average() { return ExchangeRule(RuleKind::repeated_average, std::nullopt); }
  // `s` is the fraction of the pooled wealth that is reshuffled; each agent keeps (1 - s) of its own.
  static ExchangeRule saving(double s);

  // "binomial" | "uniform" | "repeated_average" | "saving"; `s` is required iff saving.
  static ExchangeRule parse(const std::string& name, std::optional<double> s = std::nullopt);

  RuleKind kind() const noexcept { return kind_; }
  std::optional<double> s() const noexcept { return s_; }
  bool integer_valued() const noexcept { return kind_ == RuleKind::binomial; }
  std::string name() const;

 private:
  ExchangeRule(RuleKind k, std::optional<double> s) : kind_(k), s_(s) {}
  RuleKind kind_;
  std::optional<double> s_;
};

class WealthState {
 public:
  static WealthState integers(std::vector<std::int64_t> values);
  static WealthState reals(std::vector<double> values);

  std::size_t size() const noexcept;
  bool integer_valued() const noexcept { return std::holds_alternative<std::vector<std::int64_t>>(values_); }

  std::span<const std::int64_t> integer_values() const;
  std::span<const double> real_values() const;
  std::int64_t& integer_at(std::size_t i) { return std::get<0>(values_)[i]; }
  double& real_at(std::size_t i) { return std::get<1>(values_)[i]; }

  double value(std::size_t i) const;
  std::vector<double> as_doubles() const;

  // Cached at construction; exchanges never change it.
  double total() const noexcept { return total_; }
  std::int64_t integer_total() const noexcept { return integer_total_; }
  double mean() const noexcept { return total_ / static_cast<double>(size()); }

  // Recomputes the sum; throws unless it matches exactly (integers) or within 1e-9 N (reals).
  void verify_total() const;

  friend bool operator==(const WealthState&, const WealthState&) = default;

 private:
  std::variant<std::vector<std::int64_t>, std::vector<double>> values_;
  double total_ = 0.0;
  std::int64_t integer_total_ = 0;
};

// Exact Binomial(n, 1/2). Popcount of n fair bits for n <= 64.
std::int64_t sample_binomial_half(std::int64_t n, Rng& rng);

// Applies the rule to agents i and j (i != j). Everyone else is untouched.
void exchange(WealthState& state, std::size_t i, std::size_t j, const ExchangeRule& rule, Rng& rng);

struct PairChoice {
  std::size_t i;
  std::size_t j;
};

// One event: a uniformly chosen pair exchanges under `rule`.
PairChoice step(WealthState& state, const ExchangeRule& rule, Rng& rng);

class InitialCondition {
 public:
  enum class Kind { dirac, uniform_range, custom };

  static InitialCondition dirac(double k);
  // Integer rules: agent i gets a + (i mod (b - a + 1)). Real rules: evenly spaced on [a, b].
  static InitialCondition uniform_range(double a, double b);
  static InitialCondition custom(std::vector<double> values);

  // "dirac:5", "uniform:0:10", or "custom:1,2,3".
  static InitialCondition parse(const std::string& text);

  Kind kind() const noexcept { return kind_; }
  std::string describe() const;
  WealthState materialize(std::size_t N, bool integer_valued) const;

 private:
  Kind kind_ = Kind::dirac;
  double a_ = 0.0, b_ = 0.0;
  std::vector<double> values_;
};

enum class TimeConvention { discrete, poisson_clock };

struct SimConfig {
  std::size_t N = 1000;
  ExchangeRule rule = ExchangeRule::binomial();
  InitialCondition initial = InitialCondition::uniform_range(0, 10);
  std::uint64_t seed = 1;
  std::uint64_t events = 1000;
  std::uint64_t snapshot_every = 1000;
  TimeConvention time_convention = TimeConvention::discrete;
  std::uint64_t replica = 0;

  // Empty iff the run can start.
  std::vector<std::string> violations() const;
};

struct Snapshot {
  std::uint64_t event = 0;
  double t_model = 0.0;
  // counts[n] = agents with floor(wealth) = n.
  std::vector<std::uint64_t> counts;
  double mean = 0.0;
  double variance = 0.0;
  double gini = 0.0;

  Pmf empirical_pmf() const;
};

struct SimResult {
  std::vector<Snapshot> snapshots;
  WealthState final_state;
};

Snapshot take_snapshot(const WealthState& state, std::uint64_t event, double t_model);

// Snapshots at event 0, every `snapshot_every` events, and after the last event.
SimResult run(const SimConfig& cfg);

}  // namespace kinex
