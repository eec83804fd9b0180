#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "json.hpp"
#include "suffstat/dataset.hpp"
#include "suffstat/error.hpp"
#include "suffstat/linalg.hpp"
#include "suffstat/logsumexp.hpp"
#include "suffstat/model.hpp"
#include "suffstat/types.hpp"

namespace suffstat {

struct ExactSummary {
  double log_Z = 0.0;
  MomentVector tau;
  Matrix covariance;
  double min_eigenvalue = 0.0;
};

inline nlohmann::json to_json(const ExactSummary& s) {
  return {{"log_Z", s.log_Z},
          {"tau", s.tau.values()},
          {"covariance", s.covariance.data},
          {"min_eigenvalue", s.min_eigenvalue}};
}

// Brute-force enumeration over {0,1}^p. Holds the materialized log-weight
// table so repeated queries against one model skip rebuilding it.
class ExactEngine {
 public:
  struct Moments {
    double log_Z = 0.0;
    Vector tau;
    Matrix covariance;  // empty unless requested
  };

  explicit ExactEngine(const Model& model, std::size_t cap = kDefaultEnumerationCap)
      : p_(model.dimension()), log_h_(log_weight_table(model, cap)) {}

  std::size_t dimension() const noexcept { return p_; }
  std::size_t state_count() const noexcept { return log_h_.size(); }
  std::span<const double> log_weights() const noexcept { return log_h_; }

  // log h(x) + <theta, x> for every state.
  Vector log_unnormalized(const ParamVector& theta) const {
    check_theta(theta);
    Vector w(log_h_.size());
    w[0] = log_h_[0];
    Vector lin(log_h_.size(), 0.0);
    for (State x = 1; x < log_h_.size(); ++x) {
      lin[x] = lin[x & (x - 1)] + theta[static_cast<std::size_t>(std::countr_zero(x))];
      w[x] = log_h_[x] + lin[x];
    }
    return w;
  }

  double log_partition(const ParamVector& theta) const {
    return log_sum_exp(log_unnormalized(theta));
  }

  Vector probabilities(const ParamVector& theta) const {
    Vector w = log_unnormalized(theta);
    const double a = log_sum_exp(w);
    for (double& v : w) v = std::exp(v - a);
    return w;
  }

  Moments moments(const ParamVector& theta, bool with_covariance) const {
    Vector w = log_unnormalized(theta);
    const double m = *std::max_element(w.begin(), w.end());
    double z = 0.0;
    for (double& v : w) {
      v = std::exp(v - m);
      z += v;
    }
    Moments out;
    out.log_Z = m + std::log(z);
    out.tau.assign(p_, 0.0);
    Matrix second(with_covariance ? p_ : 0);
    for (State x = 1; x < w.size(); ++x) {
      const double px = w[x];
      for (State bits = x; bits; bits &= bits - 1) {
        const auto i = static_cast<std::size_t>(std::countr_zero(bits));
        out.tau[i] += px;
        if (with_covariance) {
          for (State rest = bits; rest; rest &= rest - 1) {
            second(i, static_cast<std::size_t>(std::countr_zero(rest))) += px;
          }
        }
      }
    }
    for (double& t : out.tau) t /= z;
    if (with_covariance) {
      out.covariance = Matrix(p_);
      for (std::size_t i = 0; i < p_; ++i) {
        for (std::size_t j = i; j < p_; ++j) {
          const double c = second(i, j) / z - out.tau[i] * out.tau[j];
          out.covariance(i, j) = c;
          out.covariance(j, i) = c;
        }
      }
    }
    return out;
  }

  MomentVector moment_map(const ParamVector& theta) const {
    return MomentVector::computed(moments(theta, false).tau);
  }

  Matrix covariance(const ParamVector& theta) const { return moments(theta, true).covariance; }

  ExactSummary summary(const ParamVector& theta) const {
    auto mo = moments(theta, true);
    ExactSummary s;
    s.log_Z = mo.log_Z;
    s.tau = MomentVector::computed(std::move(mo.tau));
    s.min_eigenvalue = linalg::min_eigenvalue(mo.covariance);
    s.covariance = std::move(mo.covariance);
    return s;
  }

 private:
  void check_theta(const ParamVector& theta) const {
    require(theta.size() == p_, "exact engine: theta length differs from p");
  }

  std::size_t p_;
  Vector log_h_;
};

inline double log_partition(const Model& model, const ParamVector& theta) {
  return ExactEngine(model).log_partition(theta);
}

inline MomentVector moment_map(const Model& model, const ParamVector& theta) {
  return ExactEngine(model).moment_map(theta);
}

inline Matrix covariance(const Model& model, const ParamVector& theta) {
  return ExactEngine(model).covariance(theta);
}

inline ExactSummary exact_summary(const Model& model, const ParamVector& theta) {
  return ExactEngine(model).summary(theta);
}

// n i.i.d. draws by inverting the cumulative distribution over all states.
inline Dataset exact_sample(const ExactEngine& engine, const ParamVector& theta, std::size_t n,
                            std::uint64_t seed) {
  require(n >= 1, "exact_sample: n must be positive");
  const Vector prob = engine.probabilities(theta);
  Vector cdf(prob.size());
  double acc = 0.0;
  for (std::size_t x = 0; x < prob.size(); ++x) {
    acc += prob[x];
    cdf[x] = acc;
  }
  const std::size_t p = engine.dimension();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, acc);
  std::vector<std::uint8_t> bits(n * p);
  for (std::size_t l = 0; l < n; ++l) {
    const double u = unif(rng);
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    State x = static_cast<State>(std::min<std::size_t>(it - cdf.begin(), cdf.size() - 1));
    for (std::size_t i = 0; i < p; ++i) bits[l * p + i] = static_cast<std::uint8_t>((x >> i) & 1U);
  }
  return Dataset(p, std::move(bits), seed, "exact");
}

inline Dataset exact_sample(const Model& model, const ParamVector& theta, std::size_t n,
                            std::uint64_t seed) {
  return exact_sample(ExactEngine(model), theta, n, seed);
}

// A(theta) - [H(q) + E_q(log h(X) + <theta, X>)]; nonnegative by the Gibbs
// variational principle, zero exactly at q = p_theta.
inline double gibbs_variational_gap(const ExactEngine& engine, const ParamVector& theta,
                                    std::span<const double> q) {
  require(q.size() == engine.state_count(), "gibbs_variational_gap: q must cover all 2^p states");
  double total = 0.0;
  for (double v : q) {
    require(std::isfinite(v) && v >= 0.0, "gibbs_variational_gap: q has a negative entry");
    total += v;
  }
  require(std::abs(total - 1.0) <= 1e-12, "gibbs_variational_gap: q does not sum to 1");
  const Vector w = engine.log_unnormalized(theta);
  const double a = log_sum_exp(w);
  double value = 0.0;
  for (std::size_t x = 0; x < q.size(); ++x) {
    if (q[x] > 0.0) value += q[x] * (w[x] - std::log(q[x]));
  }
  return a - value;
}

inline double gibbs_variational_gap(const Model& model, const ParamVector& theta,
                                    std::span<const double> q) {
  return gibbs_variational_gap(ExactEngine(model), theta, q);
}

struct ConditionThresholds {
  std::optional<double> L;
  std::optional<double> K;
};

struct ConditionReport {
  double delta = 0.0;
  double delta_c1 = 0.0;     // min_i min(tau_i, 1 - tau_i) at theta = 0
  double L_estimate = std::numeric_limits<double>::quiet_NaN();
  std::size_t probes_total = 0;
  std::size_t probes_feasible = 0;
  double K_actual = 0.0;
  std::optional<double> K_bound;  // beta k p, ising only
  bool c1 = false;
  bool c2 = false;
  bool c3 = false;

  bool passes() const noexcept { return c1 && c2 && c3; }
};

inline nlohmann::json to_json(const ConditionReport& r) {
  nlohmann::json j{{"delta", r.delta},           {"delta_c1", r.delta_c1},
                   {"L_estimate", r.L_estimate}, {"probes_total", r.probes_total},
                   {"probes_feasible", r.probes_feasible},
                   {"K_actual", r.K_actual},     {"c1", r.c1},
                   {"c2", r.c2},                 {"c3", r.c3}};
  j["K_bound"] = r.K_bound ? nlohmann::json(*r.K_bound) : nlohmann::json(nullptr);
  return j;
}

// Checks the three reduction conditions. L is estimated as the largest
// 1/lambda_min(Cov) over the probes whose moments land in [delta, 1-delta]^p;
// the supremum over that whole set is not computable, so the probe set is an input.
inline ConditionReport verify_conditions(const Model& model, double delta,
                                         std::span<const ParamVector> probes,
                                         const ConditionThresholds& thresholds = {}) {
  require(delta > 0.0 && delta < 0.5, "verify_conditions: delta must lie in (0, 1/2)");
  require(!probes.empty(), "verify_conditions: empty probe list");
  const ExactEngine engine(model);
  const std::size_t p = engine.dimension();

  ConditionReport r;
  r.delta = delta;
  r.probes_total = probes.size();

  const auto tau0 = engine.moment_map(ParamVector::zeros(p));
  r.delta_c1 = 0.5;
  for (double t : tau0.values()) r.delta_c1 = std::min({r.delta_c1, t, 1.0 - t});
  r.c1 = delta < r.delta_c1;

  double L = 0.0;
  for (const auto& theta : probes) {
    auto mo = engine.moments(theta, true);
    bool feasible = true;
    for (double t : mo.tau) feasible = feasible && t >= delta && t <= 1.0 - delta;
    if (!feasible) continue;
    ++r.probes_feasible;
    const double lam = linalg::min_eigenvalue(mo.covariance);
    L = std::max(L, lam > 0.0 ? 1.0 / lam : std::numeric_limits<double>::infinity());
  }
  if (r.probes_feasible > 0) r.L_estimate = L;
  r.c2 = r.probes_feasible > 0 && std::isfinite(L) && (!thresholds.L || L <= *thresholds.L);

  const auto lw = engine.log_weights();
  const auto [lo, hi] = std::minmax_element(lw.begin(), lw.end());
  r.K_actual = *hi - *lo;
  if (model.is_ising()) r.K_bound = ising_span_bound(model);
  if (thresholds.K) {
    r.c3 = r.K_actual <= *thresholds.K;
  } else {
    r.c3 = !r.K_bound || r.K_actual <= *r.K_bound * (1.0 + 1e-12);
  }
  return r;
}

}  // namespace suffstat
