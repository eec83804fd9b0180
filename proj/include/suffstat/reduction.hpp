#pragma once

#include <cmath>
#include <functional>
#include <optional>

#include "json.hpp"
#include "suffstat/oracle.hpp"
#include "suffstat/types.hpp"

namespace suffstat {

// Schedule for turning a parameter oracle into a log-partition estimate:
// t0 projected-gradient steps, m0 path segments, and the oracle accuracy
// xi_max that keeps the total error under epsilon.
struct ErrorBudget {
  std::size_t p = 0;
  double delta = 0.0;
  double L = 0.0;
  double K = 0.0;
  double epsilon = 0.0;
  std::size_t t0 = 0;
  std::size_t m0 = 0;
  double xi_max = 0.0;
  double start_gap_bound = 0.0;  // p s(delta) + p K delta
};

inline nlohmann::json to_json(const ErrorBudget& b) {
  return {{"p", b.p},     {"delta", b.delta}, {"L", b.L},   {"K", b.K},
          {"epsilon", b.epsilon}, {"t0", b.t0}, {"m0", b.m0}, {"xi_max", b.xi_max},
          {"start_gap_bound", b.start_gap_bound}};
}

// epsilon must exceed 4 p delta (K + log(4/delta)).
inline double admissibility_bound(std::size_t p, double delta, double K) {
  return 4.0 * static_cast<double>(p) * delta * (K + std::log(4.0 / delta));
}

namespace detail {
// Ceiling that treats values within a few ulps of an integer as that integer,
// so 2pL/eps = 40 (up to rounding) gives 40 rather than 41.
inline std::size_t ceil_count(double x) {
  const double r = std::round(x);
  if (std::abs(x - r) <= 1e-12 * std::max(1.0, std::abs(x))) return static_cast<std::size_t>(r);
  return static_cast<std::size_t>(std::ceil(x));
}
}  // namespace detail

inline ErrorBudget compute_budget(std::size_t p, double delta, double L, double K,
                                  double epsilon) {
  require(p >= 1, "compute_budget: p must be positive");
  require(delta > 0.0 && delta < 0.5, "compute_budget: delta must lie in (0, 1/2)");
  require(std::isfinite(L) && L > 0.0, "compute_budget: L must be positive");
  require(std::isfinite(K) && K >= 0.0, "compute_budget: K must be >= 0");
  require(std::isfinite(epsilon) && epsilon > 0.0, "compute_budget: epsilon must be positive");
  const double bound = admissibility_bound(p, delta, K);
  if (!(epsilon > bound)) {
    fail(ErrorKind::precondition, "compute_budget: epsilon " + std::to_string(epsilon) +
                                      " is not above the admissibility bound " +
                                      std::to_string(bound));
  }
  const double pd = static_cast<double>(p);
  ErrorBudget b;
  b.p = p;
  b.delta = delta;
  b.L = L;
  b.K = K;
  b.epsilon = epsilon;
  b.t0 = detail::ceil_count(2.0 * pd * L / epsilon);
  b.m0 = detail::ceil_count(4.0 * L * pd / epsilon);
  b.xi_max = epsilon / (16.0 * static_cast<double>(b.t0) * std::sqrt(pd));
  b.start_gap_bound = pd * binary_entropy(delta) + pd * K * delta;
  return b;
}

// Orthogonal projection onto [delta, 1-delta]^p.
inline MomentVector project_box(std::span<const double> u, double delta) {
  require(delta > 0.0 && delta < 0.5, "project_box: delta must lie in (0, 1/2)");
  Vector out(u.begin(), u.end());
  for (double& v : out) v = std::clamp(v, delta, 1.0 - delta);
  return MomentVector(std::move(out));
}

inline bool in_box(const MomentVector& tau, double delta) {
  for (double v : tau.values()) {
    if (!(v >= delta && v <= 1.0 - delta)) return false;
  }
  return true;
}

using TrajectoryObserver = std::function<void(std::size_t step, const MomentVector& tau)>;

// t0 steps of tau <- P_delta(tau - oracle(tau) / L) from the centre of the cube.
// The oracle reply approximates theta*(tau) = -grad F(tau), so this is ascent on F.
inline MomentVector projected_gradient_maximize(Oracle& oracle, const ErrorBudget& budget,
                                                const TrajectoryObserver& observe = {}) {
  if (oracle.xi() > budget.xi_max) {
    fail(ErrorKind::precondition, "projected_gradient_maximize: oracle xi exceeds xi_max");
  }
  const std::size_t p = budget.p;
  MomentVector tau = MomentVector::constant(p, 0.5);
  if (observe) observe(0, tau);
  Vector u(p);
  for (std::size_t t = 0; t < budget.t0; ++t) {
    const auto g = oracle.query(tau);
    for (std::size_t i = 0; i < p; ++i) u[i] = tau[i] - g[i] / budget.L;
    tau = project_box(u, budget.delta);
    if (observe) observe(t + 1, tau);
  }
  return tau;
}

// log Zhat = log_h0 - sum_{l=1}^{m} <oracle(tau_l), tau_l - tau_{l-1}> along the
// straight segment from tau_start to tau_end, oracle evaluated at right endpoints.
inline double path_integrate_logZ(Oracle& oracle, const MomentVector& tau_start,
                                  const MomentVector& tau_end, std::size_t m, double log_h0,
                                  double delta) {
  require(m >= 1, "path_integrate_logZ: need at least one segment");
  require(tau_start.size() == tau_end.size(), "path_integrate_logZ: endpoint sizes differ");
  if (!in_box(tau_start, delta) || !in_box(tau_end, delta)) {
    fail(ErrorKind::precondition, "path_integrate_logZ: endpoints must lie in the box");
  }
  if (tau_start == tau_end) return log_h0;

  const std::size_t p = tau_start.size();
  Vector prev = tau_start.values();
  Vector cur(p);
  double sum = 0.0;
  const double md = static_cast<double>(m);
  for (std::size_t l = 1; l <= m; ++l) {
    const double frac = static_cast<double>(l) / md;
    for (std::size_t i = 0; i < p; ++i) {
      cur[i] = l == m ? tau_end[i] : tau_start[i] + frac * (tau_end[i] - tau_start[i]);
    }
    const auto theta = oracle.query(MomentVector(cur));
    for (std::size_t i = 0; i < p; ++i) sum += theta[i] * (cur[i] - prev[i]);
    prev = cur;
  }
  return log_h0 - sum;
}

struct ReductionInputs {
  std::size_t p = 0;
  double delta = 0.0;
  double L = 0.0;
  double K = 0.0;
  double log_h0 = 0.0;
};

struct ReductionReport {
  double log_Z_hat = 0.0;
  MomentVector tau_final;
  std::size_t oracle_queries = 0;
  ErrorBudget budget;
  std::optional<double> exact_log_Z;
  std::optional<double> achieved_error;
};

inline nlohmann::json to_json(const ReductionReport& r) {
  nlohmann::json j{{"log_Z_hat", r.log_Z_hat},
                   {"tau_final", r.tau_final.values()},
                   {"oracle_queries", r.oracle_queries},
                   {"budget", to_json(r.budget)}};
  j["exact_log_Z"] = r.exact_log_Z ? nlohmann::json(*r.exact_log_Z) : nlohmann::json(nullptr);
  j["achieved_error"] =
      r.achieved_error ? nlohmann::json(*r.achieved_error) : nlohmann::json(nullptr);
  return j;
}

// Full pipeline: budget, projected gradient, then path integration from
// (delta, ..., delta) to the projected-gradient output with m0 segments.
// The oracle's engine supplies exact log Z(0) for comparison.
inline ReductionReport approximate_logZ(const ReductionInputs& in, Oracle& oracle,
                                        double epsilon) {
  require(in.p == oracle.engine().dimension(), "approximate_logZ: p differs from the oracle model");
  ReductionReport r;
  r.budget = compute_budget(in.p, in.delta, in.L, in.K, epsilon);
  if (oracle.xi() > r.budget.xi_max) {
    fail(ErrorKind::precondition, "approximate_logZ: oracle xi exceeds xi_max");
  }
  const std::size_t before = oracle.query_count();
  r.tau_final = projected_gradient_maximize(oracle, r.budget);
  const auto start = MomentVector::constant(in.p, in.delta);
  r.log_Z_hat = path_integrate_logZ(oracle, start, r.tau_final, r.budget.m0, in.log_h0, in.delta);
  r.oracle_queries = oracle.query_count() - before;
  r.exact_log_Z = oracle.engine().log_partition(ParamVector::zeros(in.p));
  r.achieved_error = std::abs(r.log_Z_hat - *r.exact_log_Z);
  return r;
}

}  // namespace suffstat
