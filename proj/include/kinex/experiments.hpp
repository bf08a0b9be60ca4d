#pragma once

// Experiment configs, validation, and artifact-producing runners behind the
// command line.

#include <filesystem>
#include <string>
#include <vector>

#include "kinex/io.hpp"
#include "kinex/pmf.hpp"

namespace kinex {

inline constexpr const char* kVersion = "0.1.0";

struct Violation {
  std::string field;
  std::string constraint;
  std::string value;

  std::string message() const;
};

// "dirac:k", "poisson:lambda[:K]", "binomial:n:gamma", "uniform:a:b",
// "tilted:a:b:eps" (uniform on a..b with eps moved from a to b), "custom:w0,w1,...".
Pmf parse_pmf(const std::string& text);

// Commands: simulate, meanfield, couple, chain, laplace, metrics, reproduce
// (the latter with "figure": fig1 | fig4 | fig5). A manifest is accepted in
// place of a config and contributes its "config" block.
std::vector<Violation> validate_config(const std::string& command, const Json& cfg);

// Defaults filled in and derived values (truncation, rates) made explicit.
// Throws a validation error carrying the violations.
Json resolve_config(const std::string& command, const Json& cfg);

// Validates, runs, writes artifacts plus manifest.json into out_dir, and
// returns the manifest. A non-empty out_dir is refused unless `force`.
Json run_experiment(const std::string& command, const Json& cfg, const std::filesystem::path& out_dir, bool force);

}  // namespace kinex
