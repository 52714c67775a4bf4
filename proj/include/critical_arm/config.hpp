#pragma once

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "analysis.hpp"
#include "coupling.hpp"
#include "errors.hpp"
#include "estimate.hpp"
#include "inequalities.hpp"
#include "verify.hpp"

namespace critical_arm {

inline constexpr int config_schema_version = 1;

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> n = {"verify", "onearm",   "magnetisation", "volume",
                                             "drc",    "diagrams", "betac",         "report"};
  return n;
}

struct OneArmParams {
  int d = 0;
  std::vector<int> N;  // ascending; the largest box is the primary one
  std::vector<int> m;
  double beta = 0;
  Boundary bc = Boundary::pinned;
};

struct MagnetisationParams {
  int d = 0;
  int N = 0;
  double beta = 0;
  std::vector<double> h;
};

struct VolumeParams {
  int d = 0;
  int N = 0;
  double beta = 0;
  std::vector<long> thresholds;
};

struct DrcParams {
  int d = 0;
  std::vector<int> N;
  std::vector<int> m;
  double beta = 0;
};

struct DiagramsParams {
  int d = 0;
  std::vector<int> N;
  double beta = 0;
  std::size_t root_limit = 32;
};

struct BetacParams {
  int d = 0;
  std::vector<int> sizes;
  std::vector<double> grid;
  int bisection_steps = 6;
};

struct ReportParams {
  std::vector<std::string> inputs;
  std::vector<ExponentCheck> checks;
  std::string markdown;  // empty: stdout only
};

struct VerifyParams {
  std::vector<std::string> suites = verify_suite_names();
  std::vector<std::string> inequalities = inequality_names();
  std::size_t instances = 1000;
  std::size_t es_instances = 200;
  std::size_t switching_instances = 100;
  std::size_t ratio_instances = 100;
  long sampler_samples = 1'000'000;
};

struct GateSpec {
  std::optional<double> slope;     // default: predicted_exponent
  double tolerance = 0.1;
  bool auto_range = false;
  std::optional<double> expected;  // betac
};

using CommandParams = std::variant<VerifyParams, OneArmParams, MagnetisationParams, VolumeParams, DrcParams,
                                   DiagramsParams, BetacParams, ReportParams>;

struct ExperimentConfig {
  int schema_version = config_schema_version;
  std::string command;
  McOptions mc;
  std::string out;
  std::optional<GateSpec> gate;
  CommandParams params;
  std::string source;  // config path, for relative file names
};

// ---------------------------------------------------------------------------

inline std::map<int, double> load_beta_c(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read beta_c cache: " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("beta_c cache: " + std::string(e.what()));
  }
  std::map<int, double> out;
  if (!j.contains("beta_c") || !j["beta_c"].is_object()) throw ValidationError("beta_c cache: missing beta_c object");
  for (const auto& [k, v] : j["beta_c"].items()) {
    int d = std::stoi(k);
    double b = v.is_object() ? v.at("value").get<double>() : v.get<double>();
    out[d] = b;
  }
  return out;
}

inline std::string default_beta_c_path() {
  if (const char* env = std::getenv("CRITICAL_ARM_DATA")) return std::string(env) + "/beta_c.json";
#ifdef CA_DATA_DIR
  return std::string(CA_DATA_DIR) + "/beta_c.json";
#else
  return "data/beta_c.json";
#endif
}

namespace config_detail {

// Typed access to one JSON object; unknown keys are rejected at finish().
class Block {
 public:
  Block(const nlohmann::json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) fail("must be an object");
  }

  [[noreturn]] void fail(const std::string& msg) const { throw ValidationError(where_ + ": " + msg); }

  bool has(const std::string& k) {
    seen_.insert(k);
    return j_.contains(k);
  }
  const nlohmann::json& raw(const std::string& k) {
    if (!has(k)) fail("missing field '" + k + "'");
    return j_.at(k);
  }

  long integer(const std::string& k, std::optional<long> def = std::nullopt) {
    if (!has(k)) {
      if (def) return *def;
      fail("missing field '" + k + "'");
    }
    const auto& v = j_.at(k);
    if (!v.is_number_integer()) fail("'" + k + "' must be an integer");
    return v.get<long>();
  }
  double number(const std::string& k, std::optional<double> def = std::nullopt) {
    if (!has(k)) {
      if (def) return *def;
      fail("missing field '" + k + "'");
    }
    const auto& v = j_.at(k);
    if (!v.is_number()) fail("'" + k + "' must be a number");
    double x = v.get<double>();
    if (!std::isfinite(x)) fail("'" + k + "' must be finite");
    return x;
  }
  std::string string(const std::string& k, std::optional<std::string> def = std::nullopt) {
    if (!has(k)) {
      if (def) return *def;
      fail("missing field '" + k + "'");
    }
    const auto& v = j_.at(k);
    if (!v.is_string()) fail("'" + k + "' must be a string");
    return v.get<std::string>();
  }
  bool boolean(const std::string& k, bool def) {
    if (!has(k)) return def;
    const auto& v = j_.at(k);
    if (!v.is_boolean()) fail("'" + k + "' must be true or false");
    return v.get<bool>();
  }
  template <class T>
  std::vector<T> list(const std::string& k) {
    const auto& v = raw(k);
    if (!v.is_array() || v.empty()) fail("'" + k + "' must be a non-empty array");
    std::vector<T> out;
    for (const auto& x : v) {
      if constexpr (std::is_integral_v<T>) {
        if (!x.is_number_integer()) fail("'" + k + "' must contain integers");
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!x.is_number()) fail("'" + k + "' must contain numbers");
      } else {
        if (!x.is_string()) fail("'" + k + "' must contain strings");
      }
      out.push_back(x.get<T>());
    }
    return out;
  }

  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) fail("unknown field '" + k + "'");
  }

 private:
  const nlohmann::json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

inline void positive(Block& b, const std::string& k, long v, long min = 1) {
  if (v < min) b.fail("'" + k + "' must be >= " + std::to_string(min));
}

inline int dimension(Block& b) {
  long d = b.integer("d");
  if (d < 1 || d > 12) b.fail("'d' must be in [1, 12]");
  return static_cast<int>(d);
}

struct BetaResolver {
  std::string path;
  std::optional<std::map<int, double>> cache;

  double operator()(Block& b, int d) {
    const auto& v = b.raw("beta");
    if (v.is_string()) {
      if (v.get<std::string>() != "critical") b.fail("'beta' must be a number or \"critical\"");
      if (!cache) cache = load_beta_c(path);
      auto it = cache->find(d);
      if (it == cache->end()) b.fail("no cached beta_c for d=" + std::to_string(d));
      return it->second;
    }
    double x = b.number("beta");
    if (x < 0.0) b.fail("'beta' must be >= 0");
    return x;
  }
};

inline std::vector<int> radii(Block& b, const std::string& k, int N) {
  auto m = b.list<int>(k);
  for (int x : m)
    if (x < 1 || x > N) b.fail("'" + k + "' entries must lie in [1, N]");
  for (std::size_t i = 1; i < m.size(); ++i)
    if (m[i] <= m[i - 1]) b.fail("'" + k + "' must be strictly increasing");
  return m;
}

// "N": integer or list; otherwise n_over_m · max(m), plus the half ratio when finite_size_check is set.
inline std::vector<int> box_sizes(Block& b, int mmax) {
  std::vector<int> Ns;
  if (b.has("N")) {
    if (b.has("n_over_m") || b.has("finite_size_check")) b.fail("give either 'N' or 'n_over_m'");
    const auto& v = b.raw("N");
    if (v.is_array()) Ns = b.list<int>("N");
    else Ns.push_back(static_cast<int>(b.integer("N")));
  } else {
    long r = b.integer("n_over_m", 4);
    if (r < 1) b.fail("'n_over_m' must be >= 1");
    Ns.push_back(static_cast<int>(r) * mmax);
    if (b.boolean("finite_size_check", false)) {
      if (r < 2) b.fail("'finite_size_check' needs n_over_m >= 2");
      Ns.push_back(static_cast<int>(r / 2) * mmax);
    }
  }
  std::sort(Ns.begin(), Ns.end());
  Ns.erase(std::unique(Ns.begin(), Ns.end()), Ns.end());
  for (int N : Ns)
    if (N < mmax) b.fail("'N' must be >= every radius in 'm'");
  return Ns;
}

}  // namespace config_detail

// Parses and validates; `command` is the CLI command and must agree with the file when both are given.
inline ExperimentConfig parse_config(const nlohmann::json& j, const std::string& command,
                                     const std::string& source = "") {
  using namespace config_detail;
  Block top(j, "config");
  ExperimentConfig c;
  c.source = source;
  c.schema_version = static_cast<int>(top.integer("schema_version"));
  if (c.schema_version != config_schema_version)
    top.fail("unsupported schema_version " + std::to_string(c.schema_version));
  c.command = top.string("command", command);
  if (!command.empty() && c.command != command)
    top.fail("command '" + c.command + "' does not match '" + command + "'");
  if (std::find(command_names().begin(), command_names().end(), c.command) == command_names().end())
    top.fail("unknown command '" + c.command + "'");

  long seed = top.integer("seed", 1);
  if (seed < 0) top.fail("'seed' must be >= 0");
  c.mc.seed = static_cast<std::uint64_t>(seed);
  c.mc.threads = static_cast<int>(top.integer("threads", 0));
  if (c.mc.threads < 0) top.fail("'threads' must be >= 0");
  c.out = top.string("out", c.command == "verify" ? "verify.csv" : c.command == "report" ? "report.csv" : "results.csv");

  if (top.has("mc")) {
    Block mc(j.at("mc"), "mc");
    c.mc.chains = static_cast<int>(mc.integer("chains", 4));
    positive(mc, "chains", c.mc.chains);
    c.mc.sweeps = mc.integer("sweeps", 10000);
    positive(mc, "sweeps", c.mc.sweeps);
    c.mc.burn_in = mc.integer("burn_in", -1);
    mc.finish();
  }

  std::string bc_path = default_beta_c_path();
  if (top.has("beta_c_file")) {
    std::filesystem::path p = top.string("beta_c_file");
    if (p.is_relative() && !source.empty()) p = std::filesystem::path(source).parent_path() / p;
    bc_path = p.string();
  }
  BetaResolver beta{bc_path, std::nullopt};

  if (top.has("gate")) {
    Block g(j.at("gate"), "gate");
    GateSpec gs;
    if (g.has("slope")) gs.slope = g.number("slope");
    if (g.has("expected")) gs.expected = g.number("expected");
    gs.tolerance = g.number("tolerance", 0.1);
    if (gs.tolerance <= 0.0) g.fail("'tolerance' must be > 0");
    gs.auto_range = g.boolean("auto_range", false);
    g.finish();
    c.gate = gs;
  }

  const std::string& k = c.command;
  if (k == "verify") {
    VerifyParams p;
    if (top.has("verify")) {
      Block b(j.at("verify"), "verify");
      if (b.has("suites")) {
        p.suites = b.list<std::string>("suites");
        for (const auto& s : p.suites)
          if (std::find(verify_suite_names().begin(), verify_suite_names().end(), s) == verify_suite_names().end())
            b.fail("unknown suite '" + s + "'");
      }
      if (b.has("inequalities")) {
        p.inequalities = b.list<std::string>("inequalities");
        for (const auto& s : p.inequalities)
          if (std::find(inequality_names().begin(), inequality_names().end(), s) == inequality_names().end())
            b.fail("unknown inequality '" + s + "'");
      }
      auto count = [&](const char* key, std::size_t def) {
        long v = b.integer(key, static_cast<long>(def));
        positive(b, key, v);
        return static_cast<std::size_t>(v);
      };
      p.instances = count("instances", p.instances);
      p.es_instances = count("es_instances", p.es_instances);
      p.switching_instances = count("switching_instances", p.switching_instances);
      p.ratio_instances = count("ratio_instances", p.ratio_instances);
      p.sampler_samples = static_cast<long>(count("sampler_samples", static_cast<std::size_t>(p.sampler_samples)));
      b.finish();
    }
    c.params = p;
  } else if (k == "onearm" || k == "drc") {
    Block b(top.raw(k), k);
    int d = dimension(b);
    auto m = radii(b, "m", std::numeric_limits<int>::max());
    auto Ns = box_sizes(b, m.back());
    double bt = beta(b, d);
    if (k == "onearm") {
      OneArmParams p{d, Ns, m, bt, Boundary::pinned};
      auto bc = b.string("bc", "wired");
      if (bc == "wired") p.bc = Boundary::pinned;
      else if (bc == "free") p.bc = Boundary::free;
      else b.fail("'bc' must be \"wired\" or \"free\"");
      c.params = p;
    } else {
      c.params = DrcParams{d, Ns, m, bt};
    }
    b.finish();
  } else if (k == "magnetisation") {
    Block b(top.raw(k), k);
    MagnetisationParams p;
    p.d = dimension(b);
    p.N = static_cast<int>(b.integer("N"));
    positive(b, "N", p.N);
    p.beta = beta(b, p.d);
    p.h = b.list<double>("h");
    for (double h : p.h)
      if (!(h > 0.0) || !std::isfinite(h)) b.fail("'h' entries must be > 0");
    b.finish();
    c.params = p;
  } else if (k == "volume") {
    Block b(top.raw(k), k);
    VolumeParams p;
    p.d = dimension(b);
    p.N = static_cast<int>(b.integer("N"));
    positive(b, "N", p.N);
    p.beta = beta(b, p.d);
    p.thresholds = b.list<long>("thresholds");
    for (std::size_t i = 0; i < p.thresholds.size(); ++i) {
      if (p.thresholds[i] < 1) b.fail("'thresholds' entries must be >= 1");
      if (i && p.thresholds[i] <= p.thresholds[i - 1]) b.fail("'thresholds' must be strictly increasing");
    }
    b.finish();
    c.params = p;
  } else if (k == "diagrams") {
    Block b(top.raw(k), k);
    DiagramsParams p;
    p.d = dimension(b);
    p.N = b.list<int>("N");
    for (int n : p.N)
      if (n < 1) b.fail("'N' entries must be >= 1");
    p.beta = beta(b, p.d);
    long r = b.integer("root_limit", 32);
    positive(b, "root_limit", r);
    p.root_limit = static_cast<std::size_t>(r);
    b.finish();
    c.params = p;
  } else if (k == "betac") {
    Block b(top.raw(k), k);
    BetacParams p;
    p.d = dimension(b);
    p.sizes = b.list<int>("sizes");
    if (p.sizes.size() < 2) b.fail("'sizes' needs at least 2 entries");
    for (int L : p.sizes)
      if (L < 3) b.fail("'sizes' entries must be >= 3");
    p.grid = b.list<double>("grid");
    if (p.grid.size() < 3) b.fail("'grid' needs at least 3 entries");
    for (double x : p.grid)
      if (!(x > 0.0)) b.fail("'grid' entries must be > 0");
    p.bisection_steps = static_cast<int>(b.integer("bisection_steps", 6));
    positive(b, "bisection_steps", p.bisection_steps, 0);
    b.finish();
    c.params = p;
  } else {
    Block b(top.raw(k), k);
    ReportParams p;
    p.inputs = b.list<std::string>("inputs");
    if (!source.empty())
      for (auto& in : p.inputs) {
        std::filesystem::path q = in;
        if (q.is_relative() && !std::filesystem::exists(q)) q = std::filesystem::path(source).parent_path() / q;
        in = q.string();
      }
    p.markdown = b.string("markdown", "");
    const auto& checks = b.raw("checks");
    if (!checks.is_array() || checks.empty()) b.fail("'checks' must be a non-empty array");
    for (std::size_t i = 0; i < checks.size(); ++i) {
      Block cb(checks[i], "report.checks[" + std::to_string(i) + "]");
      ExponentCheck ec;
      ec.observable = cb.string("observable");
      ec.d = dimension(cb);
      ec.bc = cb.string("bc", ec.observable == "one_arm" ? "wired" : "free");
      ec.tolerance = cb.number("tolerance", 0.1);
      if (ec.tolerance <= 0.0) cb.fail("'tolerance' must be > 0");
      if (cb.has("predicted")) ec.predicted = cb.number("predicted");
      ec.auto_range = cb.boolean("auto_range", false);
      if (cb.has("N")) ec.N = static_cast<int>(cb.integer("N"));
      if (cb.has("beta")) ec.beta = beta(cb, ec.d);
      cb.finish();
      p.checks.push_back(ec);
    }
    b.finish();
    c.params = p;
  }
  top.finish();
  return c;
}

inline ExperimentConfig load_config(const std::string& path, const std::string& command) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read config: " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("config is not valid JSON: " + std::string(e.what()));
  }
  return parse_config(j, command, path);
}

}  // namespace critical_arm
