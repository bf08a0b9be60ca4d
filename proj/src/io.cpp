#include "kinex/io.hpp"

#include <openssl/evp.h>

#include <array>
#include <charconv>
#include <cmath>
#include <memory>
#include <sstream>

#include "kinex/error.hpp"

namespace kinex {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) fail(ErrorKind::io, "cannot open " + path.string() + " for writing");
  std::string line;
  for (const auto& h : header) line += h + ',';
  line.back() = '\n';
  out_ << line;
}

void CsvWriter::close() {
  out_.close();
  if (!out_) fail(ErrorKind::io, "failed writing " + path_.string());
}

void write_json(const std::filesystem::path& path, const Json& value) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::io, "cannot open " + path.string() + " for writing");
  out << value.dump(2) << '\n';
  if (!out) fail(ErrorKind::io, "failed writing " + path.string());
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot read " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    fail(ErrorKind::io, "invalid JSON in " + path.string() + ": " + e.what());
  }
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot read " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) fail(ErrorKind::io, "sha256 init failed");
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md.data(), &len);
  static constexpr char hex[] = "0123456789abcdef";
  std::string s;
  for (unsigned int k = 0; k < len; ++k) {
    s += hex[md[k] >> 4];
    s += hex[md[k] & 15];
  }
  return s;
}

Json pmf_to_json(const Pmf& p) {
  Json w = Json::array();
  for (double x : p.weights()) w.push_back(x);
  return Json{{"weights", w}, {"trunc_defect", p.trunc_defect()}};
}

Pmf pmf_from_json(const Json& j) {
  try {
    return Pmf(j.at("weights").get<std::vector<double>>(), j.value("trunc_defect", 0.0));
  } catch (const Json::exception& e) {
    fail(ErrorKind::parameter, std::string("bad pmf JSON: ") + e.what());
  }
}

void write_pmf_csv(const std::filesystem::path& path, const Pmf& p) {
  CsvWriter csv(path, {"n", "p_n"});
  for (std::size_t n = 0; n < p.size(); ++n) csv.row(n, p[n]);
  csv.close();
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj) {
  CsvWriter csv(path, {"t", "n", "p_n"});
  for (std::size_t i = 0; i < traj.size(); ++i)
    for (std::size_t n = 0; n < traj.states[i].size(); ++n) csv.row(traj.times[i], n, traj.states[i][n]);
  csv.close();
}

Json trajectory_summary(const Trajectory& traj) {
  Json times = Json::array(), defect = Json::array(), m1 = Json::array(), m2 = Json::array();
  for (std::size_t i = 0; i < traj.size(); ++i) {
    times.push_back(traj.times[i]);
    defect.push_back(traj.mass_defect[i]);
    m1.push_back(mean(traj.states[i]));
    m2.push_back(second_moment(traj.states[i]));
  }
  return Json{{"times", times}, {"mass_defect", defect}, {"mean", m1}, {"second_moment", m2}};
}

void write_trace_csv(const std::filesystem::path& path, const TraceSeries& s) {
  CsvWriter csv(path, {"t", "value"});
  for (std::size_t i = 0; i < s.size(); ++i) csv.row(s.times[i], s.values[i]);
  csv.close();
}

TraceSeries read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot read " + path.string());
  TraceSeries s;
  s.label = path.stem().string();
  std::string line;
  std::getline(in, line);
  if (line.rfind("t,value", 0) != 0) fail(ErrorKind::io, path.string() + ": expected header t,value");
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    double t = 0.0, v = 0.0;
    const char* end = line.data() + line.size();
    const auto r1 = std::from_chars(line.data(), line.data() + (comma == std::string::npos ? 0 : comma), t);
    const auto r2 = comma == std::string::npos ? r1 : std::from_chars(line.data() + comma + 1, end, v);
    if (comma == std::string::npos || r1.ec != std::errc() || r2.ec != std::errc())
      fail(ErrorKind::io, path.string() + ":" + std::to_string(lineno) + ": malformed row");
    s.times.push_back(t);
    s.values.push_back(v);
  }
  s.validate();
  return s;
}

Json fit_to_json(const DecayFit& f) {
  return Json{{"exp_rate", f.exp_rate},
              {"exp_r2", f.exp_r2},
              {"poly_exponent", f.poly_exponent},
              {"poly_r2", f.poly_r2},
              {"points", f.points}};
}

}  // namespace kinex
