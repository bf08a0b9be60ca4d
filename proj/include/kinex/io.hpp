#pragma once

// CSV/JSON artifact writers and checksums.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "json.hpp"
#include "kinex/meanfield.hpp"
#include "kinex/metrics.hpp"
#include "kinex/pmf.hpp"

namespace kinex {

using Json = nlohmann::json;

// Shortest representation that round-trips.
std::string format_double(double v);

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);

  template <typename... Ts>
  void row(const Ts&... cells) {
    std::string line;
    ((line += cell(cells), line += ','), ...);
    line.back() = '\n';
    out_ << line;
  }

  void close();

 private:
  static std::string cell(double v) { return format_double(v); }
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(const char* s) { return s; }
  template <typename T>
    requires std::is_integral_v<T>
  static std::string cell(T v) {
    return std::to_string(v);
  }

  std::filesystem::path path_;
  std::ofstream out_;
};

// Pretty-printed with two-space indent; object keys come out sorted.
void write_json(const std::filesystem::path& path, const Json& value);
Json read_json(const std::filesystem::path& path);

std::string sha256_file(const std::filesystem::path& path);

Json pmf_to_json(const Pmf& p);
Pmf pmf_from_json(const Json& j);
void write_pmf_csv(const std::filesystem::path& path, const Pmf& p);

// Long format t,n,p_n.
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj);
// {times, mass_defect, mean, second_moment}.
Json trajectory_summary(const Trajectory& traj);

void write_trace_csv(const std::filesystem::path& path, const TraceSeries& s);
TraceSeries read_trace_csv(const std::filesystem::path& path);

Json fit_to_json(const DecayFit& f);

}  // namespace kinex
