#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "suffstat/dataset.hpp"
#include "suffstat/error.hpp"
#include "suffstat/exact.hpp"
#include "suffstat/graph.hpp"
#include "suffstat/model.hpp"
#include "suffstat/oracle.hpp"
#include "suffstat/reduction.hpp"
#include "suffstat/sampling.hpp"

namespace suffstat::harness {

enum class Command { exact, invert, reduce, sample, estimate, verify, budget };
enum class Format { csv, json };
enum class Sampler { exact, gibbs };

struct ExperimentConfig {
  Command command = Command::exact;

  // Model source: exactly one of graph_path, dense_path, or (random_p, random_k).
  std::optional<std::string> graph_path;
  std::optional<std::string> dense_path;
  std::optional<std::size_t> random_p;
  std::optional<std::size_t> random_k;
  double beta = 0.0;

  std::optional<Vector> theta;
  std::optional<std::uint64_t> theta_seed;
  double theta_range = 0.5;  // planted theta ~ U[-range, range]^p
  std::optional<Vector> tau;

  std::optional<double> delta;
  std::optional<double> epsilon;
  std::optional<double> xi;
  std::optional<double> L;
  std::optional<double> K;
  double L_safety = 1.5;
  std::size_t probe_count = 8;

  std::size_t n = 1000;
  std::size_t burn_in = 0;
  std::size_t thin = 0;
  Sampler sampler = Sampler::exact;
  std::optional<std::string> data_path;
  double max_invalid_fraction = 0.0;

  std::uint64_t seed = 1;
  std::size_t trials = 1;
  Format format = Format::csv;
  std::optional<std::string> out_path;
  bool deterministic = false;

  void validate() const {
    const int sources = static_cast<int>(graph_path.has_value()) +
                        static_cast<int>(dense_path.has_value()) +
                        static_cast<int>(random_p.has_value() || random_k.has_value());
    const bool needs_model = command != Command::budget && command != Command::estimate;
    if (needs_model) require(sources == 1, "config: give exactly one model source");
    if (random_p.has_value() != random_k.has_value()) {
      fail(ErrorKind::invalid_input, "config: --p and --k go together");
    }
    require(std::isfinite(beta) && beta >= 0.0, "config: beta must be >= 0");
    require(trials >= 1, "config: trials must be positive");
    require(n >= 1, "config: n must be positive");
    require(theta_range >= 0.0, "config: theta range must be >= 0");
    if (delta) require(*delta > 0.0 && *delta < 0.5, "config: delta must lie in (0, 1/2)");
    if (epsilon) require(*epsilon > 0.0, "config: epsilon must be positive");
    if (xi) require(*xi >= 0.0, "config: xi must be >= 0");
    if (L) require(*L > 0.0, "config: L must be positive");
    if (K) require(*K >= 0.0, "config: K must be >= 0");
    require(max_invalid_fraction >= 0.0 && max_invalid_fraction <= 1.0,
            "config: invalid fraction must lie in [0,1]");
  }
};

// ---------------------------------------------------------------------------
// formatting

// Shortest decimal that parses back to the same double.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string format_optional(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

inline double parse_double(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  require(res.ec == std::errc() && res.ptr == s.data() + s.size(), "csv: bad number '" + s + "'");
  return v;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline Vector parse_list(const std::string& s) {
  Vector out;
  std::string cell;
  std::istringstream in(s);
  while (std::getline(in, cell, ',')) {
    cell.erase(0, cell.find_first_not_of(" \t"));
    cell.erase(cell.find_last_not_of(" \t") + 1);
    if (!cell.empty()) out.push_back(parse_double(cell));
  }
  return out;
}

// ---------------------------------------------------------------------------
// model loading

inline Model read_dense_model(std::istream& in, std::size_t cap = kDefaultEnumerationCap) {
  std::size_t p = 0;
  require(static_cast<bool>(in >> p), "dense file: missing p");
  require(p >= 1 && p <= cap, "dense file: p outside [1, cap]");
  Vector table;
  double v = 0.0;
  std::string tok;
  while (in >> tok) {
    v = parse_double(tok);
    table.push_back(v);
  }
  return build_dense_model(p, std::move(table), cap);
}

inline Model load_model(const ExperimentConfig& cfg, std::size_t trial = 0) {
  if (cfg.graph_path) {
    std::ifstream in(*cfg.graph_path);
    require(in.good(), "cannot open graph file " + *cfg.graph_path);
    return build_antiferro_ising(read_graph(in), cfg.beta);
  }
  if (cfg.dense_path) {
    std::ifstream in(*cfg.dense_path);
    require(in.good(), "cannot open dense file " + *cfg.dense_path);
    return read_dense_model(in);
  }
  require(cfg.random_p && cfg.random_k, "config: no model source");
  return build_antiferro_ising(random_regular_graph(*cfg.random_p, *cfg.random_k, cfg.seed + trial),
                               cfg.beta);
}

inline ParamVector planted_theta(const ExperimentConfig& cfg, std::size_t p) {
  if (cfg.theta) {
    require(cfg.theta->size() == p, "config: theta length differs from p");
    return ParamVector(*cfg.theta);
  }
  std::mt19937_64 rng(cfg.theta_seed.value_or(cfg.seed));
  std::uniform_real_distribution<double> unif(-cfg.theta_range, cfg.theta_range);
  Vector t(p);
  for (double& v : t) v = unif(rng);
  return ParamVector(std::move(t));
}

// Runs fn(trial) for every trial on a small worker pool; the caller writes
// results into trial-indexed slots, so output order never depends on scheduling.
inline void for_each_trial(std::size_t trials, bool deterministic,
                           const std::function<void(std::size_t)>& fn) {
  std::size_t workers = deterministic ? 1 : std::max(1U, std::thread::hardware_concurrency());
  workers = std::min(workers, trials);
  if (workers <= 1) {
    for (std::size_t t = 0; t < trials; ++t) fn(t);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(trials);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t t = next++; t < trials; t = next++) {
        try {
          fn(t);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// ---------------------------------------------------------------------------
// reduction experiment

struct ReductionRow {
  std::size_t trial = 0;
  std::size_t p = 0;
  double delta = 0.0;
  double L = 0.0;
  double K = 0.0;
  double epsilon = 0.0;
  std::size_t t0 = 0;
  std::size_t m0 = 0;
  double xi = 0.0;
  std::optional<double> log_Z_hat;
  std::optional<double> exact_log_Z;
  std::optional<double> achieved_error;
  std::size_t oracle_queries = 0;
  double wall_ms = 0.0;
  std::size_t probes = 0;           // theta probes used to measure L
  std::size_t probes_feasible = 0;  // probes whose moments fell inside the box
  std::string status = "ok";  // ok | inadmissible | oracle_too_coarse | conditions_failed | error
  std::string message;

  bool ok() const { return status == "ok"; }
  bool within_epsilon() const { return ok() && achieved_error && *achieved_error <= epsilon; }

  friend bool operator==(const ReductionRow&, const ReductionRow&) = default;
};

inline const char* kReductionCsvHeader =
    "trial,p,delta,L,K,epsilon,t0,m0,xi,log_Z_hat,exact_log_Z,achieved_error,oracle_queries,"
    "wall_ms,probes,probes_feasible,status";

inline std::vector<ParamVector> default_probes(std::size_t p, std::size_t count,
                                               std::uint64_t seed) {
  std::vector<ParamVector> probes{ParamVector::zeros(p)};
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (std::size_t c = 0; c < count; ++c) {
    Vector t(p);
    for (double& v : t) v = unif(rng);
    probes.emplace_back(std::move(t));
  }
  return probes;
}

// Default delta = 1/(10 p K); falls back to 1/(10 p) for a flat h.
inline double default_delta(std::size_t p, double K) {
  const double pd = static_cast<double>(p);
  return std::min(0.25, K > 0.0 ? 1.0 / (10.0 * pd * K) : 1.0 / (10.0 * pd));
}

// Default epsilon: 25% above the admissibility bound.
inline double default_epsilon(std::size_t p, double delta, double K) {
  return 1.25 * admissibility_bound(p, delta, K);
}

inline ReductionRow run_reduction_trial(const ExperimentConfig& cfg, std::size_t trial) {
  const auto started = std::chrono::steady_clock::now();
  ReductionRow row;
  row.trial = trial;
  const Model model = load_model(cfg, trial);
  const std::size_t p = model.dimension();
  row.p = p;

  const ExactEngine engine(model);
  const auto lw = engine.log_weights();
  const auto [lo, hi] = std::minmax_element(lw.begin(), lw.end());
  row.K = cfg.K.value_or(model.is_ising() ? ising_span_bound(model) : *hi - *lo);
  row.delta = cfg.delta.value_or(default_delta(p, row.K));

  const auto probes = default_probes(p, cfg.probe_count, cfg.seed + trial);
  const auto cond = verify_conditions(model, row.delta, probes, {cfg.L, row.K});
  row.probes = cond.probes_total;
  row.probes_feasible = cond.probes_feasible;
  row.L = cfg.L.value_or(cfg.L_safety * cond.L_estimate);
  row.epsilon = cfg.epsilon.value_or(default_epsilon(p, row.delta, row.K));
  auto finish = [&](std::string status, std::string message) {
    row.status = std::move(status);
    row.message = std::move(message);
    row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
    return row;
  };
  if (!cond.passes()) {
    return finish("conditions_failed", "C1=" + std::to_string(cond.c1) + " C2=" +
                                           std::to_string(cond.c2) + " C3=" + std::to_string(cond.c3));
  }

  ErrorBudget budget;
  try {
    budget = compute_budget(p, row.delta, row.L, row.K, row.epsilon);
  } catch (const Error& e) {
    return finish("inadmissible", e.what());
  }
  row.t0 = budget.t0;
  row.m0 = budget.m0;
  row.xi = cfg.xi.value_or(budget.xi_max);
  if (row.xi > budget.xi_max) return finish("oracle_too_coarse", "xi exceeds xi_max");

  Oracle oracle(model, row.xi, row.xi > 0.0 ? NoiseMode::sphere : NoiseMode::exact,
                cfg.seed + 7919 * (trial + 1));
  try {
    const auto report = approximate_logZ({p, row.delta, row.L, row.K, log_weight_at_zero(model)},
                                         oracle, row.epsilon);
    row.log_Z_hat = report.log_Z_hat;
    row.exact_log_Z = report.exact_log_Z;
    row.achieved_error = report.achieved_error;
    row.oracle_queries = report.oracle_queries;
  } catch (const Error& e) {
    row.oracle_queries = oracle.query_count();
    return finish("error", e.what());
  }
  return finish("ok", "");
}

inline std::vector<ReductionRow> run_reduction_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<ReductionRow> rows(cfg.trials);
  for_each_trial(cfg.trials, cfg.deterministic,
                 [&](std::size_t t) { rows[t] = run_reduction_trial(cfg, t); });
  return rows;
}

inline void write_reduction_csv(std::ostream& out, const std::vector<ReductionRow>& rows) {
  out << kReductionCsvHeader << '\n';
  for (const auto& r : rows) {
    out << r.trial << ',' << r.p << ',' << format_double(r.delta) << ',' << format_double(r.L)
        << ',' << format_double(r.K) << ',' << format_double(r.epsilon) << ',' << r.t0 << ','
        << r.m0 << ',' << format_double(r.xi) << ',' << format_optional(r.log_Z_hat) << ','
        << format_optional(r.exact_log_Z) << ',' << format_optional(r.achieved_error) << ','
        << r.oracle_queries << ',' << format_double(r.wall_ms) << ',' << r.probes << ','
        << r.probes_feasible << ',' << r.status << '\n';
  }
}

inline std::vector<ReductionRow> read_reduction_csv(std::istream& in) {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)) && line == kReductionCsvHeader,
          "reduction csv: bad header");
  std::vector<ReductionRow> rows;
  auto opt = [](const std::string& s) -> std::optional<double> {
    if (s.empty()) return std::nullopt;
    return parse_double(s);
  };
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c = split_csv_line(line);
    require(c.size() == 17, "reduction csv: expected 17 columns");
    ReductionRow r;
    r.trial = std::stoull(c[0]);
    r.p = std::stoull(c[1]);
    r.delta = parse_double(c[2]);
    r.L = parse_double(c[3]);
    r.K = parse_double(c[4]);
    r.epsilon = parse_double(c[5]);
    r.t0 = std::stoull(c[6]);
    r.m0 = std::stoull(c[7]);
    r.xi = parse_double(c[8]);
    r.log_Z_hat = opt(c[9]);
    r.exact_log_Z = opt(c[10]);
    r.achieved_error = opt(c[11]);
    r.oracle_queries = std::stoull(c[12]);
    r.wall_ms = parse_double(c[13]);
    r.probes = std::stoull(c[14]);
    r.probes_feasible = std::stoull(c[15]);
    r.status = c[16];
    rows.push_back(std::move(r));
  }
  return rows;
}

inline nlohmann::json to_json(const ReductionRow& r) {
  auto opt = [](const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  return {{"trial", r.trial},   {"p", r.p},         {"delta", r.delta},
          {"L", r.L},           {"K", r.K},         {"epsilon", r.epsilon},
          {"t0", r.t0},         {"m0", r.m0},       {"xi", r.xi},
          {"log_Z_hat", opt(r.log_Z_hat)},          {"exact_log_Z", opt(r.exact_log_Z)},
          {"achieved_error", opt(r.achieved_error)}, {"oracle_queries", r.oracle_queries},
          {"wall_ms", r.wall_ms}, {"probes", r.probes}, {"probes_feasible", r.probes_feasible},
          {"status", r.status}, {"message", r.message}};
}

// ---------------------------------------------------------------------------
// sampling experiment

struct SamplingTrial {
  std::size_t trial = 0;
  std::size_t n = 0;
  double max_error = 0.0;  // inf when a coordinate is invalid
  std::size_t valid = 0;
  bool success = false;
  bool flagged = false;
  FieldEstimate estimate;
};

struct SamplingReport {
  ParamVector theta;
  double xi = 0.0;
  std::vector<SamplingTrial> trials;

  double success_fraction() const {
    std::size_t s = 0;
    for (const auto& t : trials) s += t.success;
    return trials.empty() ? 0.0 : static_cast<double>(s) / static_cast<double>(trials.size());
  }
  bool any_flagged() const {
    return std::any_of(trials.begin(), trials.end(), [](const auto& t) { return t.flagged; });
  }
};

inline Dataset draw_dataset(const ExperimentConfig& cfg, const Model& model, const ParamVector& theta,
                            std::size_t n, std::uint64_t seed) {
  if (cfg.sampler == Sampler::gibbs) return gibbs_sample(model, theta, n, seed, {cfg.burn_in, cfg.thin});
  return exact_sample(model, theta, n, seed);
}

inline SamplingReport run_sampling_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const Model model = load_model(cfg);
  require(model.is_ising(), "sampling experiment: requires an Ising model");
  const std::size_t p = model.dimension();
  SamplingReport report;
  report.theta = planted_theta(cfg, p);
  report.xi = cfg.xi.value_or(0.1);
  report.trials.resize(cfg.trials);

  std::optional<ExactEngine> engine;
  if (cfg.sampler == Sampler::exact) engine.emplace(model);

  for_each_trial(cfg.trials, cfg.deterministic, [&](std::size_t t) {
    const std::uint64_t seed = cfg.seed + t;
    const Dataset data = engine ? exact_sample(*engine, report.theta, cfg.n, seed)
                                : draw_dataset(cfg, model, report.theta, cfg.n, seed);
    SamplingTrial tr;
    tr.trial = t;
    tr.n = cfg.n;
    tr.estimate = estimate_fields_from_samples(data, model.graph(), model.beta());
    tr.valid = tr.estimate.valid_count();
    tr.max_error = max_field_error(tr.estimate, report.theta);
    tr.success = tr.max_error <= report.xi;
    tr.flagged = static_cast<double>(p - tr.valid) > cfg.max_invalid_fraction * static_cast<double>(p);
    report.trials[t] = std::move(tr);
  });
  return report;
}

inline void write_sampling_csv(std::ostream& out, const SamplingReport& r) {
  out << "trial,n,max_error,valid,success,flagged\n";
  for (const auto& t : r.trials) {
    out << t.trial << ',' << t.n << ',' << format_double(t.max_error) << ',' << t.valid << ','
        << (t.success ? 1 : 0) << ',' << (t.flagged ? 1 : 0) << '\n';
  }
}

inline nlohmann::json to_json(const SamplingReport& r) {
  nlohmann::json trials = nlohmann::json::array();
  for (const auto& t : r.trials) {
    nlohmann::json errs = nlohmann::json::array();
    for (std::size_t i = 0; i < r.theta.size(); ++i) {
      errs.push_back(t.estimate.valid[i] ? nlohmann::json(std::abs(t.estimate.theta_hat[i] - r.theta[i]))
                                         : nlohmann::json(nullptr));
    }
    trials.push_back({{"trial", t.trial}, {"n", t.n}, {"max_error", t.max_error},
                      {"valid", t.valid}, {"success", t.success}, {"flagged", t.flagged},
                      {"vertex_errors", errs}});
  }
  return {{"theta", r.theta.values()}, {"xi", r.xi}, {"success_fraction", r.success_fraction()},
          {"trials", trials}};
}

// ---------------------------------------------------------------------------
// invariant suite

struct CheckResult {
  std::string name;
  bool passed = false;
  double residual = 0.0;
  double threshold = 0.0;
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
  }
};

// Lets tests swap in a faulty covariance to confirm the suite catches it.
struct VerifyHooks {
  std::function<Matrix(const ExactEngine&, const ParamVector&)> covariance;
};

inline VerifyReport run_verify(const Model& model, std::uint64_t seed, std::size_t points = 5,
                               const VerifyHooks& hooks = {}) {
  const ExactEngine engine(model);
  const std::size_t p = engine.dimension();
  auto cov_of = [&](const ParamVector& th) {
    return hooks.covariance ? hooks.covariance(engine, th) : engine.covariance(th);
  };
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-2.0, 2.0);
  std::vector<ParamVector> thetas{ParamVector::zeros(p)};
  for (std::size_t c = 1; c < points; ++c) {
    Vector t(p);
    for (double& v : t) v = unif(rng);
    thetas.emplace_back(std::move(t));
  }

  VerifyReport report;
  auto add = [&](std::string name, double residual, double threshold) {
    report.checks.push_back({std::move(name), residual <= threshold, residual, threshold});
  };

  constexpr double h = 1e-4;
  double grad_res = 0.0, hess_res = 0.0, floor_res = -std::numeric_limits<double>::infinity(), trip_res = 0.0, dual_res = 0.0;
  double fgrad_res = 0.0, gap_res = 0.0, gap_min = 0.0, concave_res = 0.0;
  for (const auto& th : thetas) {
    const auto tau = engine.moment_map(th);
    const Matrix cov = cov_of(th);
    for (std::size_t i = 0; i < p; ++i) {
      Vector up = th.values(), dn = th.values();
      up[i] += h;
      dn[i] -= h;
      const double fd = (engine.log_partition(ParamVector(up)) - engine.log_partition(ParamVector(dn))) / (2 * h);
      grad_res = std::max(grad_res, std::abs(fd - tau[i]));
      const auto tu = engine.moment_map(ParamVector(up));
      const auto td = engine.moment_map(ParamVector(dn));
      for (std::size_t j = 0; j < p; ++j) {
        hess_res = std::max(hess_res, std::abs((tu[j] - td[j]) / (2 * h) - cov(j, i)));
      }
    }
    const auto probs = engine.probabilities(th);
    const double pmin = *std::min_element(probs.begin(), probs.end());
    floor_res = std::max(floor_res, pmin * pmin - linalg::min_eigenvalue(cov));

    if (!tau.is_interior()) continue;
    const auto back = invert_moment_map(engine, tau, 1e-8);
    for (std::size_t i = 0; i < p; ++i) trip_res = std::max(trip_res, std::abs(back[i] - th[i]));
    const double F = free_energy(engine, tau, 1e-10);
    dual_res = std::max(dual_res, std::abs(engine.log_partition(th) - F - dot(tau.values(), th.values())));

    gap_res = std::max(gap_res, std::abs(gibbs_variational_gap(engine, th, probs)));
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    Vector q(probs.size());
    double total = 0.0;
    for (double& v : q) total += (v = u01(rng));
    for (double& v : q) v /= total;
    gap_min = std::min(gap_min, gibbs_variational_gap(engine, th, q));
  }

  // Free-energy gradient and concavity at interior moment points.
  std::uniform_real_distribution<double> inner(0.2, 0.8);
  for (std::size_t c = 0; c < points; ++c) {
    Vector t1(p), t2(p);
    for (double& v : t1) v = inner(rng);
    for (double& v : t2) v = inner(rng);
    const MomentVector tau1(t1);
    const auto theta1 = invert_moment_map(engine, tau1, 1e-12);
    for (std::size_t i = 0; i < p; ++i) {
      Vector up = t1, dn = t1;
      up[i] += h;
      dn[i] -= h;
      const double fd = (free_energy(engine, MomentVector(up), 1e-12) -
                         free_energy(engine, MomentVector(dn), 1e-12)) / (2 * h);
      fgrad_res = std::max(fgrad_res, std::abs(fd + theta1[i]));
    }
    const double lam = inner(rng);
    Vector mid(p);
    for (std::size_t i = 0; i < p; ++i) mid[i] = lam * t1[i] + (1 - lam) * t2[i];
    const double lhs = free_energy(engine, MomentVector(mid), 1e-12);
    const double rhs = lam * free_energy(engine, tau1, 1e-12) +
                       (1 - lam) * free_energy(engine, MomentVector(t2), 1e-12);
    concave_res = std::max(concave_res, rhs - lhs);
  }

  add("gradient_identity", grad_res, 1e-5);
  add("hessian_identity", hess_res, 1e-4);
  add("covariance_floor", floor_res, 0.0);
  add("round_trip_inversion", trip_res, 1e-6);
  add("legendre_duality", dual_res, 1e-8);
  add("free_energy_gradient", fgrad_res, 1e-4);
  add("gibbs_gap_at_maximizer", gap_res, 1e-9);
  add("gibbs_gap_nonnegative", -gap_min, 1e-9);
  add("free_energy_concavity", concave_res, 1e-8);

  if (model.is_ising()) {
    const auto tau0 = engine.moment_map(ParamVector::zeros(p));
    double flip = 0.0;
    for (double t : tau0.values()) flip = std::max(flip, std::abs(t - 0.5));
    add("flip_symmetry", flip, 1e-10);
    double ratio = 0.0;
    const Graph& g = model.graph();
    for (const auto& th : thetas) {
      for (std::size_t i = 0; i < p; ++i) {
        const double expected = std::exp(2.0 * model.beta() * static_cast<double>(g.degree()) + th[i]);
        ratio = std::max(ratio, std::abs(exact_neighborhood_ratio(engine, g, th, i) / expected - 1.0));
      }
    }
    add("ratio_identity", ratio, 1e-10);
  }
  return report;
}

inline void write_verify_csv(std::ostream& out, const VerifyReport& r) {
  out << "check,passed,residual,threshold\n";
  for (const auto& c : r.checks) {
    out << c.name << ',' << (c.passed ? 1 : 0) << ',' << format_double(c.residual) << ','
        << format_double(c.threshold) << '\n';
  }
}

inline nlohmann::json to_json(const VerifyReport& r) {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : r.checks) {
    checks.push_back({{"check", c.name}, {"passed", c.passed}, {"residual", c.residual},
                      {"threshold", c.threshold}});
  }
  return {{"passed", r.passed()}, {"checks", checks}};
}

}  // namespace suffstat::harness
