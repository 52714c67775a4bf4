// critical-arm: command-line runner for verification suites and Monte Carlo campaigns.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "critical_arm.hpp"

using namespace critical_arm;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_runtime = 1;
constexpr int exit_validation = 2;
constexpr int exit_gate = 3;

struct GateFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Run {
  ExperimentConfig cfg;
  bool gate = false;
};

void print_rows(const std::vector<Estimate>& rows) {
  for (const auto& e : rows) {
    std::printf("  %-20s d=%d N=%d m=%d beta=%.7g h=%.4g bc=%s  %.6g ± %.2g  (n=%zu)\n", e.params.observable.c_str(),
                e.params.d, e.params.N, e.params.m, e.params.beta, e.params.h, e.params.bc.c_str(), e.mean, e.se,
                e.nsamples);
    for (const auto& w : e.warnings) std::printf("    warning: %s\n", w.c_str());
  }
}

// Log-log slope of rows against the x column, checked against the gate when requested.
void slope_gate(const Run& r, const std::vector<Estimate>& rows, const std::string& obs, int d,
                const std::string& bc) {
  if (!r.gate) return;
  GateSpec g = r.cfg.gate.value_or(GateSpec{});
  auto expected = g.slope ? g.slope : predicted_exponent(obs, d, bc);
  if (!expected) throw ValidationError("gate: no predicted exponent for " + obs + " d=" + std::to_string(d) +
                                       " bc=" + bc + "; set gate.slope");
  std::vector<FitPoint> pts;
  for (const auto& e : rows)
    if (e.params.observable == obs) pts.push_back({x_value(e), e.mean, e.se});
  SlopeFit f;
  try {
    f = g.auto_range ? fit_log_slope_auto(pts) : fit_log_slope(pts);
  } catch (const NonPositiveMeanError& e) {
    throw GateFailure(std::string("gate: ") + e.what());
  }
  bool pass = std::abs(f.slope - *expected) <= g.tolerance;
  std::printf("gate %s: slope %.4f ± %.4f over [%g, %g] (chi2/dof %.2f), expected %.4f ± %.3f  %s\n", obs.c_str(),
              f.slope, f.slope_se, f.x_min, f.x_max, f.chi2_dof, *expected, g.tolerance, pass ? "PASS" : "FAIL");
  if (!pass) throw GateFailure("gate failed");
}

void emit(const Run& r, const std::vector<Estimate>& rows) {
  print_rows(rows);
  append_results(r.cfg.out, rows);
  std::printf("appended %zu rows to %s\n", rows.size(), r.cfg.out.c_str());
}

// Gap between the largest and smallest box at each radius.
void finite_size_gap(const std::vector<std::vector<Estimate>>& per_box) {
  if (per_box.size() < 2) return;
  const auto& lo = per_box.front();
  const auto& hi = per_box.back();
  for (std::size_t i = 0; i < hi.size(); ++i)
    std::printf("  finite-size gap m=%d: N=%d − N=%d = %.4g ± %.2g\n", hi[i].params.m, hi[i].params.N,
                lo[i].params.N, hi[i].mean - lo[i].mean, std::hypot(hi[i].se, lo[i].se));
}

void run_onearm(const Run& r, const OneArmParams& p) {
  std::vector<Estimate> rows;
  std::vector<std::vector<Estimate>> per_box;
  for (int N : p.N) {
    auto res = estimate_one_arm(p.d, N, p.m, p.beta, p.bc, r.cfg.mc);
    per_box.push_back(res.arm);
    rows.insert(rows.end(), res.arm.begin(), res.arm.end());
    if (res.magnetisation) rows.push_back(*res.magnetisation);
  }
  emit(r, rows);
  finite_size_gap(per_box);
  slope_gate(r, per_box.back(), "one_arm", p.d, to_string(p.bc));
}

void run_magnetisation(const Run& r, const MagnetisationParams& p) {
  std::vector<Estimate> rows;
  for (double h : p.h) rows.push_back(estimate_magnetisation(p.d, p.N, p.beta, h, r.cfg.mc));
  emit(r, rows);
  slope_gate(r, rows, "magnetisation", p.d, "free");
}

void run_volume(const Run& r, const VolumeParams& p) {
  auto rows = estimate_volume_tail(p.d, p.N, p.beta, p.thresholds, r.cfg.mc);
  emit(r, rows);
  slope_gate(r, rows, "volume_tail", p.d, "free");
}

void run_drc(const Run& r, const DrcParams& p) {
  std::vector<Estimate> rows;
  std::vector<std::vector<Estimate>> per_box;
  for (int N : p.N) {
    per_box.push_back(drc_one_arm(p.d, N, p.m, p.beta, r.cfg.mc));
    rows.insert(rows.end(), per_box.back().begin(), per_box.back().end());
  }
  emit(r, rows);
  finite_size_gap(per_box);
  slope_gate(r, per_box.back(), "drc_one_arm", p.d, "free");
}

Estimate diagram_row(const DiagramResult& x, int d, int N, const McOptions& o, double wall) {
  Estimate e;
  e.params = {x.quantity, d, N, static_cast<int>(x.root), x.beta, 0.0, "free"};
  e.mean = x.value;
  e.se = x.se;
  e.nsamples = x.exact ? 0 : x.nsamples;
  e.seed = o.seed;
  e.walltime_s = wall;
  return e;
}

void run_diagrams(const Run& r, const DiagramsParams& p) {
  std::vector<Estimate> rows;
  bool ok = true;
  for (int N : p.N) {
    auto t0 = std::chrono::steady_clock::now();
    auto res = diagrams(p.d, N, p.beta, r.cfg.mc, p.root_limit);
    double wall = seconds_since(t0);
    for (const auto* x : {&res.bubble, &res.triangle, &res.susceptibility})
      rows.push_back(diagram_row(*x, p.d, N, r.cfg.mc, wall));
    double slack = 4 * std::hypot(res.bubble.se, res.triangle.se) + 1e-12;
    if (res.bubble.value > res.triangle.value + slack) ok = false;
  }
  emit(r, rows);
  if (r.gate) {
    std::printf("gate diagrams: bubble <= triangle on every box  %s\n", ok ? "PASS" : "FAIL");
    if (!ok) throw GateFailure("gate failed");
  }
}

void run_betac(const Run& r, const BetacParams& p) {
  auto t0 = std::chrono::steady_clock::now();
  BetaCResult res;
  try {
    res = estimate_beta_c(p.d, p.sizes, p.grid, r.cfg.mc, p.bisection_steps);
  } catch (const NoCrossingError& e) {
    if (r.gate) throw GateFailure(e.what());
    throw;
  }
  double wall = seconds_since(t0);
  const std::size_t per_eval = static_cast<std::size_t>(r.cfg.mc.chains) * static_cast<std::size_t>(r.cfg.mc.sweeps);
  std::vector<Estimate> rows;
  for (const auto& c : res.crossings) {
    Estimate e;
    e.params = {"binder_crossing", p.d, c.L2, c.L1, c.beta, 0.0, "torus"};
    e.mean = c.beta;
    e.se = 0.5 * (c.hi - c.lo);
    e.nsamples = per_eval;
    e.seed = r.cfg.mc.seed;
    e.walltime_s = wall;
    rows.push_back(e);
  }
  Estimate e;
  e.params = {"beta_c", p.d, res.crossings.back().L2, res.crossings.front().L1, res.beta_c, 0.0, "torus"};
  e.mean = res.beta_c;
  e.se = res.half_width;
  e.nsamples = per_eval;
  e.seed = r.cfg.mc.seed;
  e.walltime_s = wall;
  rows.push_back(e);
  emit(r, rows);
  if (r.gate) {
    GateSpec g = r.cfg.gate.value_or(GateSpec{});
    std::optional<double> want = g.expected;
    if (!want) {
      auto cache = load_beta_c(default_beta_c_path());
      if (cache.count(p.d)) want = cache[p.d];
    }
    if (!want) throw ValidationError("gate: no expected beta_c for d=" + std::to_string(p.d) + "; set gate.expected");
    bool pass = std::abs(res.beta_c - *want) <= g.tolerance;
    std::printf("gate beta_c: %.6f ± %.6f, expected %.6f ± %.4f  %s\n", res.beta_c, res.half_width, *want,
                g.tolerance, pass ? "PASS" : "FAIL");
    if (!pass) throw GateFailure("gate failed");
  }
}

void run_verify(const Run& r, const VerifyParams& p) {
  std::vector<InequalityReport> rows;
  auto add = [&](const char* suite, std::vector<InequalityReport> part) {
    std::size_t fails = 0;
    for (const auto& x : part) fails += !x.pass;
    std::printf("  %-12s %6zu checks  %zu failed\n", suite, part.size(), fails);
    rows.insert(rows.end(), part.begin(), part.end());
  };
  const auto seed = r.cfg.mc.seed;
  for (const auto& s : p.suites) {
    if (s == "exact") add("exact", run_exact_suite(p.es_instances, p.switching_instances, p.ratio_instances, seed));
    else if (s == "inequalities") add("inequalities", run_inequality_suite(p.inequalities, p.instances, seed));
    else if (s == "entropy") add("entropy", run_entropy_suite());
    else if (s == "samplers") add("samplers", run_sampler_suite(p.sampler_samples, seed));
  }
  bool fresh = true;
  {
    std::ifstream in(r.cfg.out, std::ios::binary | std::ios::ate);
    if (in && in.tellg() > 0) fresh = false;
  }
  std::ofstream os(r.cfg.out, std::ios::app);
  if (!os) throw ValidationError("cannot open output file: " + r.cfg.out);
  write_inequality_csv(os, rows, fresh);
  std::size_t fails = 0;
  for (const auto& x : rows)
    if (!x.pass) {
      ++fails;
      std::printf("  FAIL %s seed=%llu %s lhs=%.17g rhs=%.17g\n", x.name.c_str(),
                  static_cast<unsigned long long>(x.instance_seed), x.instance.c_str(), x.left, x.right);
    }
  std::printf("appended %zu rows to %s, %zu failed\n", rows.size(), r.cfg.out.c_str(), fails);
  if (r.gate && fails) throw GateFailure("gate failed");
}

void run_report(const Run& r, const ReportParams& p) {
  std::vector<Estimate> table;
  for (const auto& in : p.inputs) {
    auto part = read_results(in);
    table.insert(table.end(), part.begin(), part.end());
  }
  auto checks = p.checks;
  if (r.cfg.gate && r.cfg.gate->auto_range)
    for (auto& c : checks) c.auto_range = true;
  std::vector<ExponentRow> rows;
  try {
    rows = exponent_report(table, checks);
  } catch (const MissingRowError& e) {
    if (r.gate) throw GateFailure(e.what());
    throw;
  } catch (const NonPositiveMeanError& e) {
    if (r.gate) throw GateFailure(e.what());
    throw;
  }
  write_report_markdown(std::cout, rows);
  if (!p.markdown.empty()) {
    std::ofstream md(p.markdown);
    if (!md) throw ValidationError("cannot open markdown output: " + p.markdown);
    write_report_markdown(md, rows);
  }
  std::ofstream os(r.cfg.out);
  if (!os) throw ValidationError("cannot open output file: " + r.cfg.out);
  write_report_csv(os, rows);
  if (r.gate) {
    bool ok = true;
    for (const auto& x : rows) ok = ok && (!x.has_prediction || x.pass);
    std::printf("gate report: %s\n", ok ? "PASS" : "FAIL");
    if (!ok) throw GateFailure("gate failed");
  }
}

int dispatch(const Run& r) {
  std::printf("critical-arm %s: seed=%llu chains=%d sweeps=%ld threads=%d\n", r.cfg.command.c_str(),
              static_cast<unsigned long long>(r.cfg.mc.seed), r.cfg.mc.chains, r.cfg.mc.sweeps,
              r.cfg.mc.threads > 0 ? r.cfg.mc.threads : default_threads());
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, VerifyParams>) run_verify(r, p);
        else if constexpr (std::is_same_v<T, OneArmParams>) run_onearm(r, p);
        else if constexpr (std::is_same_v<T, MagnetisationParams>) run_magnetisation(r, p);
        else if constexpr (std::is_same_v<T, VolumeParams>) run_volume(r, p);
        else if constexpr (std::is_same_v<T, DrcParams>) run_drc(r, p);
        else if constexpr (std::is_same_v<T, DiagramsParams>) run_diagrams(r, p);
        else if constexpr (std::is_same_v<T, BetacParams>) run_betac(r, p);
        else run_report(r, p);
      },
      r.cfg.params);
  return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Verification suites and Monte Carlo campaigns for critical Ising one-arm observables"};
  app.require_subcommand(1);
  std::string config;
  bool gate = false;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> out;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"verify", "exact identities, inequality checkers, entropy checks and sampler gates"},
      {"onearm", "one-arm probabilities P[0 <-> dΛ_m] on Λ_N"},
      {"magnetisation", "magnetisation <σ_0> on Λ_N against the field h"},
      {"volume", "cluster volume tail P[|C(0)| >= t]"},
      {"drc", "double random current one-arm probabilities"},
      {"diagrams", "bubble and triangle diagrams and susceptibility"},
      {"betac", "β_c from Binder cumulant crossings on the torus"},
      {"report", "power-law fits against predicted exponents"}};
  for (const auto& [name, help] : commands) {
    auto* sc = app.add_subcommand(name, help);
    sc->add_option("--config", config, "JSON config file")->required();
    sc->add_flag("--gate", gate, "exit 3 when the acceptance gate fails");
    sc->add_option("--seed", seed, "master seed (overrides the config)");
    sc->add_option("--threads", threads, "worker threads (default: CRITICAL_ARM_THREADS or hardware)")
        ->check(CLI::NonNegativeNumber);
    sc->add_option("--out", out, "output CSV (overrides the config)");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? exit_ok : exit_validation;
  }
  std::string command = app.get_subcommands().front()->get_name();

  Run r;
  r.gate = gate;
  try {
    r.cfg = load_config(config, command);
    if (seed) r.cfg.mc.seed = *seed;
    if (threads) r.cfg.mc.threads = *threads;
    if (out) r.cfg.out = *out;
    validate_options(r.cfg.mc);
    return dispatch(r);
  } catch (const GateFailure& e) {
    std::fprintf(stderr, "critical-arm: %s\n", e.what());
    return exit_gate;
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "critical-arm: validation error: %s\n", e.what());
    return exit_validation;
  } catch (const HypothesisError& e) {
    std::fprintf(stderr, "critical-arm: validation error: %s\n", e.what());
    return exit_validation;
  } catch (const BudgetError& e) {
    std::fprintf(stderr, "critical-arm: validation error: %s\n", e.what());
    return exit_validation;
  } catch (const CapacityError& e) {
    std::fprintf(stderr, "critical-arm: validation error: %s\n", e.what());
    return exit_validation;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "critical-arm: error: %s\n", e.what());
    return exit_runtime;
  }
}
