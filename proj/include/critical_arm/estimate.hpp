#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "errors.hpp"

namespace critical_arm {

struct ParamRecord {
  std::string observable;
  int d = 0;
  int N = 0;
  int m = 0;
  double beta = 0;
  double h = 0;
  std::string bc = "free";
};

struct Estimate {
  double mean = 0;
  double se = 0;
  std::size_t nsamples = 0;
  ParamRecord params;
  std::uint64_t seed = 0;
  double walltime_s = 0;
  std::vector<std::string> warnings;
};

struct McOptions {
  int chains = 4;
  long sweeps = 10000;   // measured sweeps per chain
  long burn_in = -1;     // < 0: automatic
  std::uint64_t seed = 1;
  int threads = 0;       // 0: environment / hardware default
};

inline constexpr std::size_t min_bins = 32;
inline constexpr long min_burn_in = 500;
inline constexpr double burn_in_tau_factor = 20.0;

inline int default_threads() {
  if (const char* env = std::getenv("CRITICAL_ARM_THREADS")) {
    int t = std::atoi(env);
    if (t > 0) return t;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

// Runs f(i) for i in [0, n) on a pool; results are stored by index.
template <class F>
auto run_indexed(std::size_t n, int threads, F&& f) -> std::vector<decltype(f(std::size_t{0}))> {
  using R = decltype(f(std::size_t{0}));
  std::vector<R> out(n);
  if (threads <= 0) threads = default_threads();
  std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = f(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          out[i] = f(i);
        } catch (...) {
          std::lock_guard<std::mutex> lk(mu);
          if (!err) err = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
  return out;
}

// Integrated autocorrelation time with a self-consistent window (c = 6).
inline double integrated_autocorrelation(const std::vector<double>& x) {
  const std::size_t n = x.size();
  if (n < 4) return 0.5;
  double mu = 0;
  for (double v : x) mu += v;
  mu /= static_cast<double>(n);
  double c0 = 0;
  for (double v : x) c0 += (v - mu) * (v - mu);
  c0 /= static_cast<double>(n);
  if (c0 <= 0) return 0.5;
  double tau = 0.5;
  for (std::size_t t = 1; t < n / 2; ++t) {
    double c = 0;
    for (std::size_t i = 0; i + t < n; ++i) c += (x[i] - mu) * (x[i + t] - mu);
    c /= static_cast<double>(n - t);
    tau += c / c0;
    if (static_cast<double>(t) >= 6.0 * tau) break;
  }
  return std::max(tau, 0.5);
}

struct Combined {
  double mean = 0;
  double se = 0;
  double binned_se = 0;
  double chain_se = 0;
  std::size_t n = 0;
  std::vector<std::string> warnings;
};

// Mean over all samples; error = max(binned error, across-chain error).
inline Combined combine_chains(const std::vector<std::vector<double>>& chains) {
  Combined c;
  std::vector<double> bins, means;
  double total = 0;
  for (const auto& s : chains) {
    if (s.empty()) continue;
    double sum = 0;
    for (double v : s) sum += v;
    total += sum;
    c.n += s.size();
    means.push_back(sum / static_cast<double>(s.size()));
    std::size_t B = std::min(min_bins, s.size());
    std::size_t per = s.size() / B;
    for (std::size_t b = 0; b < B; ++b) {
      double acc = 0;
      for (std::size_t i = b * per; i < (b + 1) * per; ++i) acc += s[i];
      bins.push_back(acc / static_cast<double>(per));
    }
  }
  if (c.n == 0) throw ValidationError("no samples");
  c.mean = total / static_cast<double>(c.n);
  auto sd_of_mean = [](const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    double mu = 0;
    for (double x : v) mu += x;
    mu /= static_cast<double>(v.size());
    double ss = 0;
    for (double x : v) ss += (x - mu) * (x - mu);
    return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
  };
  c.binned_se = sd_of_mean(bins);
  c.chain_se = sd_of_mean(means);
  c.se = std::max(c.binned_se, c.chain_se);
  if (means.size() >= 2) {
    double spread = c.chain_se * std::sqrt(static_cast<double>(means.size()));
    double per_chain = c.binned_se * std::sqrt(static_cast<double>(means.size()));
    if (spread > 5.0 * per_chain && spread > 1e-12) c.warnings.push_back("chains disagree: possible non-thermalization");
  }
  return c;
}

inline Estimate make_estimate(const Combined& c, ParamRecord p, std::uint64_t seed, double wall) {
  Estimate e;
  e.mean = c.mean;
  e.se = c.se;
  e.nsamples = c.n;
  e.params = std::move(p);
  e.seed = seed;
  e.walltime_s = wall;
  e.warnings = c.warnings;
  return e;
}

inline void validate_options(const McOptions& o) {
  if (o.chains < 1) throw ValidationError("chains must be >= 1");
  if (o.sweeps < 1) throw ValidationError("sweeps must be >= 1");
}

}  // namespace critical_arm
