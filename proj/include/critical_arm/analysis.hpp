#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "estimate.hpp"
#include "lattice.hpp"
#include "rng.hpp"
#include "swendsen_wang.hpp"

namespace critical_arm {

struct FitPoint {
  double x = 0;
  double mean = 0;
  double se = 0;
};

struct SlopeFit {
  double slope = 0;
  double slope_se = 0;
  double intercept = 0;
  double x_min = 0;
  double x_max = 0;
  double chi2_dof = 0;
  std::size_t npoints = 0;
  bool weighted = true;  // false: ordinary least squares (some stderr was 0)
};

// Least squares of log(mean) on log(x), weights (se/mean)^-2.
inline SlopeFit fit_log_slope(const std::vector<FitPoint>& pts) {
  if (pts.size() < 3) throw ValidationError("fit_log_slope: need at least 3 points");
  for (const auto& p : pts) {
    if (!(p.mean > 0.0)) throw NonPositiveMeanError("fit_log_slope: non-positive mean at x=" + std::to_string(p.x));
    if (!(p.x > 0.0)) throw ValidationError("fit_log_slope: x must be positive");
    if (p.se < 0.0) throw ValidationError("fit_log_slope: negative stderr");
  }
  SlopeFit f;
  f.npoints = pts.size();
  f.x_min = f.x_max = pts[0].x;
  bool any_zero = false;
  for (const auto& p : pts) {
    f.x_min = std::min(f.x_min, p.x);
    f.x_max = std::max(f.x_max, p.x);
    if (p.se == 0.0) any_zero = true;
  }
  f.weighted = !any_zero;
  const std::size_t n = pts.size();
  std::vector<double> X(n), Y(n), W(n);
  for (std::size_t i = 0; i < n; ++i) {
    X[i] = std::log(pts[i].x);
    Y[i] = std::log(pts[i].mean);
    double rel = pts[i].se / pts[i].mean;
    W[i] = f.weighted ? 1.0 / (rel * rel) : 1.0;
  }
  double sw = 0, sx = 0, sy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sw += W[i];
    sx += W[i] * X[i];
    sy += W[i] * Y[i];
  }
  double xb = sx / sw, yb = sy / sw;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += W[i] * (X[i] - xb) * (X[i] - xb);
    sxy += W[i] * (X[i] - xb) * (Y[i] - yb);
  }
  if (f.x_min == f.x_max || sxx <= 0.0) throw ValidationError("fit_log_slope: all x values coincide");
  f.slope = sxy / sxx;
  f.intercept = yb - f.slope * xb;
  double chi2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double r = Y[i] - f.intercept - f.slope * X[i];
    chi2 += W[i] * r * r;
  }
  double dof = static_cast<double>(n - 2);
  f.chi2_dof = chi2 / dof;
  f.slope_se = f.weighted ? std::sqrt(1.0 / sxx) : std::sqrt(chi2 / dof / sxx);
  return f;
}

inline std::vector<FitPoint> fit_points(const std::vector<std::pair<double, Estimate>>& pts) {
  std::vector<FitPoint> out;
  for (const auto& [x, e] : pts) out.push_back({x, e.mean, e.se});
  return out;
}

inline SlopeFit fit_log_slope(const std::vector<std::pair<double, Estimate>>& pts) {
  return fit_log_slope(fit_points(pts));
}

// Drops the smallest x until chi2/dof ≤ max_chi2 or only 3 points remain.
inline SlopeFit fit_log_slope_auto(std::vector<FitPoint> pts, double max_chi2 = 2.0) {
  std::sort(pts.begin(), pts.end(), [](const FitPoint& a, const FitPoint& b) { return a.x < b.x; });
  auto f = fit_log_slope(pts);
  while (f.weighted && f.chi2_dof > max_chi2 && pts.size() > 3) {
    pts.erase(pts.begin());
    f = fit_log_slope(pts);
  }
  return f;
}

// ---------------------------------------------------------------------------
// Binder cumulant on the torus

struct BinderEstimate {
  double U = 0;
  double se = 0;
  double m2 = 0;
  std::size_t nsamples = 0;
};

// U_L(β) = 1 − ⟨M⁴⟩/(3⟨M²⟩²) with cluster estimators: ⟨M²⟩ = E Σ|K|², ⟨M⁴⟩ = E[3(Σ|K|²)² − 2Σ|K|⁴].
// Jackknife error over the pooled bins of all chains.
inline BinderEstimate binder_cumulant(int d, int L, double beta, const McOptions& o) {
  validate_options(o);
  auto g = LatticeGraph::torus(d, L, false);
  const std::size_t nv = g.lattice_vertex_count();
  const double V = static_cast<double>(nv);
  auto data = sw_series(g, CouplingSpec::uniform(beta), o, 2, [&] {
    return [nv, V](SamplerState& st, double* out) {
      double s2 = 0, s4 = 0;
      for (std::uint32_t v = 0; v < nv; ++v)
        if (st.clusters.find(v) == v) {
          double k = st.clusters.component_size(v) / V;
          s2 += k * k;
          s4 += k * k * k * k;
        }
      out[0] = s2;
      out[1] = 3 * s2 * s2 - 2 * s4;
    };
  });
  std::vector<double> b2, b4;
  for (const auto& chain : data) {
    std::size_t n = chain[0].size();
    std::size_t B = std::min(min_bins, n);
    std::size_t per = n / B;
    for (std::size_t b = 0; b < B; ++b) {
      double a2 = 0, a4 = 0;
      for (std::size_t i = b * per; i < (b + 1) * per; ++i) {
        a2 += chain[0][i];
        a4 += chain[1][i];
      }
      b2.push_back(a2 / per);
      b4.push_back(a4 / per);
    }
  }
  const std::size_t nb = b2.size();
  double t2 = 0, t4 = 0;
  for (std::size_t i = 0; i < nb; ++i) {
    t2 += b2[i];
    t4 += b4[i];
  }
  auto U = [](double m2, double m4) { return 1.0 - m4 / (3.0 * m2 * m2); };
  BinderEstimate r;
  r.m2 = t2 / nb;
  r.U = U(t2 / nb, t4 / nb);
  r.nsamples = static_cast<std::size_t>(o.chains) * static_cast<std::size_t>(o.sweeps);
  if (nb >= 2) {
    std::vector<double> jk(nb);
    double mu = 0;
    for (std::size_t i = 0; i < nb; ++i) {
      jk[i] = U((t2 - b2[i]) / (nb - 1), (t4 - b4[i]) / (nb - 1));
      mu += jk[i];
    }
    mu /= nb;
    double ss = 0;
    for (double x : jk) ss += (x - mu) * (x - mu);
    r.se = std::sqrt(ss * (nb - 1) / nb);
  }
  return r;
}

struct PairCrossing {
  int L1 = 0, L2 = 0;
  double beta = 0;
  double lo = 0, hi = 0;  // final bracket
};

struct BetaCResult {
  double beta_c = 0;
  double half_width = 0;
  std::vector<PairCrossing> crossings;
};

namespace detail {
inline std::uint64_t eval_seed(std::uint64_t master, int L, double beta) {
  std::uint64_t x = master ^ (static_cast<std::uint64_t>(L) * 0x9e3779b97f4a7c15ULL);
  std::uint64_t b = static_cast<std::uint64_t>(std::llround(beta * 1e12));
  x ^= splitmix64(b);
  return splitmix64(x);
}
}  // namespace detail

// Crossings of U_L across consecutive sizes, first sign change on the grid, refined by bisection.
inline BetaCResult estimate_beta_c(int d, std::vector<int> sizes, std::vector<double> grid, const McOptions& o,
                                   int bisection_steps = 6) {
  if (sizes.size() < 2) throw ValidationError("beta_c: need at least 2 sizes");
  if (grid.size() < 3) throw ValidationError("beta_c: need at least 3 grid points");
  std::sort(sizes.begin(), sizes.end());
  std::sort(grid.begin(), grid.end());
  for (int L : sizes)
    if (L < 3) throw ValidationError("beta_c: sizes must be >= 3");
  for (double b : grid)
    if (!(b > 0.0) || !std::isfinite(b)) throw ValidationError("beta_c: grid values must be positive");
  std::map<std::pair<int, double>, double> cache;
  auto U = [&](int L, double beta) {
    auto key = std::make_pair(L, beta);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    McOptions oo = o;
    oo.seed = detail::eval_seed(o.seed, L, beta);
    double u = binder_cumulant(d, L, beta, oo).U;
    cache[key] = u;
    return u;
  };
  BetaCResult res;
  for (std::size_t p = 0; p + 1 < sizes.size(); ++p) {
    int L1 = sizes[p], L2 = sizes[p + 1];
    auto diff = [&](double b) { return U(L2, b) - U(L1, b); };
    std::optional<std::size_t> at;
    double prev = diff(grid[0]);
    for (std::size_t i = 1; i < grid.size(); ++i) {
      double cur = diff(grid[i]);
      if (prev <= 0.0 && cur > 0.0) {
        at = i - 1;
        break;
      }
      prev = cur;
    }
    if (!at)
      throw NoCrossingError("beta_c: Binder cumulants of L=" + std::to_string(L1) + " and L=" + std::to_string(L2) +
                            " do not cross on the grid");
    double lo = grid[*at], hi = grid[*at + 1];
    double dlo = diff(lo), dhi = diff(hi);
    for (int s = 0; s < bisection_steps; ++s) {
      double mid = 0.5 * (lo + hi);
      double dm = diff(mid);
      if (dm > 0.0) {
        hi = mid;
        dhi = dm;
      } else {
        lo = mid;
        dlo = dm;
      }
    }
    double x = dhi > dlo ? lo + (hi - lo) * (-dlo) / (dhi - dlo) : 0.5 * (lo + hi);
    res.crossings.push_back({L1, L2, x, lo, hi});
  }
  double mn = res.crossings[0].beta, mx = mn, sum = 0, bracket = 0;
  for (const auto& c : res.crossings) {
    mn = std::min(mn, c.beta);
    mx = std::max(mx, c.beta);
    sum += c.beta;
    bracket = std::max(bracket, 0.5 * (c.hi - c.lo));
  }
  res.beta_c = sum / res.crossings.size();
  res.half_width = std::max(0.5 * (mx - mn), bracket);
  return res;
}

// ---------------------------------------------------------------------------
// Exponent report

// Exponent of the power law in the x column (m for radii and volume thresholds, h for the field).
inline std::optional<double> predicted_exponent(const std::string& observable, int d, const std::string& bc) {
  if (observable == "one_arm") {
    if (d == 2) return -0.125;
    if (bc == "wired" && d >= 4) return -1.0;
    if (bc == "free" && d == 4) return -1.0;
    if (bc == "free" && d >= 6) return -2.0;
    return std::nullopt;
  }
  if (observable == "drc_one_arm" && d >= 4) return -static_cast<double>(d - 2);
  if (observable == "magnetisation" && d >= 4) return 1.0 / 3.0;
  if (observable == "volume_tail" && d >= 6) return -0.5;
  return std::nullopt;
}

struct ExponentCheck {
  std::string observable;
  int d = 0;
  std::string bc;
  double tolerance = 0.1;
  std::optional<double> predicted;  // default: predicted_exponent
  bool auto_range = false;
  std::optional<int> N;             // restrict to one box size
  std::optional<double> beta;       // restrict to one β (within 1e-9)
};

struct ExponentRow {
  std::string observable;
  int d = 0;
  std::string bc;
  SlopeFit fit;
  double predicted = std::numeric_limits<double>::quiet_NaN();
  double tolerance = 0;
  bool has_prediction = false;
  bool pass = false;
};

inline double x_value(const Estimate& e) {
  return e.params.observable == "magnetisation" ? e.params.h : static_cast<double>(e.params.m);
}

inline std::vector<ExponentRow> exponent_report(const std::vector<Estimate>& table,
                                                const std::vector<ExponentCheck>& checks) {
  std::vector<ExponentRow> out;
  for (const auto& c : checks) {
    std::map<double, FitPoint> pts;
    for (const auto& e : table) {
      if (e.params.observable != c.observable || e.params.d != c.d || e.params.bc != c.bc) continue;
      if (c.N && e.params.N != *c.N) continue;
      if (c.beta && std::abs(e.params.beta - *c.beta) > 1e-9) continue;
      double x = x_value(e);
      if (x <= 0.0) continue;
      pts[x] = {x, e.mean, e.se};  // later rows for the same x win
    }
    if (pts.size() < 3)
      throw MissingRowError("exponent_report: fewer than 3 rows for " + c.observable + " d=" + std::to_string(c.d) +
                            " bc=" + c.bc);
    std::vector<FitPoint> v;
    for (const auto& [x, p] : pts) v.push_back(p);
    ExponentRow r;
    r.observable = c.observable;
    r.d = c.d;
    r.bc = c.bc;
    r.tolerance = c.tolerance;
    r.fit = c.auto_range ? fit_log_slope_auto(v) : fit_log_slope(v);
    auto pred = c.predicted ? c.predicted : predicted_exponent(c.observable, c.d, c.bc);
    if (pred) {
      r.has_prediction = true;
      r.predicted = *pred;
      r.pass = std::abs(r.fit.slope - *pred) <= c.tolerance;
    }
    out.push_back(r);
  }
  return out;
}

inline void write_report_markdown(std::ostream& os, const std::vector<ExponentRow>& rows) {
  os << "| observable | d | bc | slope | stderr | range | chi2/dof | predicted | tolerance | pass |\n";
  os << "|---|---|---|---|---|---|---|---|---|---|\n";
  char buf[512];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "| %s | %d | %s | %.4f | %.4f | %g–%g | %.2f | %s | %.3f | %s |\n",
                  r.observable.c_str(), r.d, r.bc.c_str(), r.fit.slope, r.fit.slope_se, r.fit.x_min, r.fit.x_max,
                  r.fit.chi2_dof, r.has_prediction ? std::to_string(r.predicted).c_str() : "none", r.tolerance,
                  r.has_prediction ? (r.pass ? "yes" : "no") : "n/a");
    os << buf;
  }
}

inline void write_report_csv(std::ostream& os, const std::vector<ExponentRow>& rows) {
  os << "observable,d,bc,slope,slope_stderr,x_min,x_max,chi2_dof,predicted,tolerance,pass\n";
  char buf[512];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%d,%s,%.17g,%.17g,%.17g,%.17g,%.17g,%s,%.17g,%s\n", r.observable.c_str(), r.d,
                  r.bc.c_str(), r.fit.slope, r.fit.slope_se, r.fit.x_min, r.fit.x_max, r.fit.chi2_dof,
                  r.has_prediction ? std::to_string(r.predicted).c_str() : "", r.tolerance,
                  r.has_prediction ? (r.pass ? "true" : "false") : "");
    os << buf;
  }
}

}  // namespace critical_arm
