#pragma once

#include <cstdio>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "estimate.hpp"

namespace critical_arm {

inline constexpr const char* results_header = "observable,d,N,m,beta,h,bc,mean,stderr,nsamples,seed,walltime_s";

inline std::string format_result_row(const Estimate& e) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%s,%d,%d,%d,%.17g,%.17g,%s,%.17g,%.17g,%zu,%llu,%.3f", e.params.observable.c_str(),
                e.params.d, e.params.N, e.params.m, e.params.beta, e.params.h, e.params.bc.c_str(), e.mean, e.se,
                e.nsamples, static_cast<unsigned long long>(e.seed), e.walltime_s);
  return buf;
}

inline void write_results(std::ostream& os, const std::vector<Estimate>& rows, bool header = true) {
  if (header) os << results_header << '\n';
  for (const auto& e : rows) os << format_result_row(e) << '\n';
}

// Appends rows; the header is written when the file is new or empty.
inline void append_results(const std::string& path, const std::vector<Estimate>& rows) {
  bool fresh = true;
  {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (in && in.tellg() > 0) fresh = false;
  }
  std::ofstream os(path, std::ios::app);
  if (!os) throw ValidationError("cannot open output file: " + path);
  write_results(os, rows, fresh);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, ',')) out.push_back(cur);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline std::vector<Estimate> read_results(std::istream& is) {
  std::vector<Estimate> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line == results_header) continue;
    auto f = split_csv_line(line);
    if (f.size() != 12) throw ValidationError("results csv: line " + std::to_string(lineno) + " has " +
                                              std::to_string(f.size()) + " fields, expected 12");
    try {
      Estimate e;
      e.params.observable = f[0];
      e.params.d = std::stoi(f[1]);
      e.params.N = std::stoi(f[2]);
      e.params.m = std::stoi(f[3]);
      e.params.beta = std::stod(f[4]);
      e.params.h = std::stod(f[5]);
      e.params.bc = f[6];
      e.mean = std::stod(f[7]);
      e.se = std::stod(f[8]);
      e.nsamples = static_cast<std::size_t>(std::stoull(f[9]));
      e.seed = std::stoull(f[10]);
      e.walltime_s = std::stod(f[11]);
      out.push_back(std::move(e));
    } catch (const std::logic_error&) {
      throw ValidationError("results csv: malformed number on line " + std::to_string(lineno));
    }
  }
  return out;
}

inline std::vector<Estimate> read_results(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read results file: " + path);
  return read_results(in);
}

}  // namespace critical_arm
