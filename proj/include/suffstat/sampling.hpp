#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "suffstat/dataset.hpp"
#include "suffstat/exact.hpp"
#include "suffstat/graph.hpp"
#include "suffstat/model.hpp"
#include "suffstat/types.hpp"

namespace suffstat {

// T_i = (1/n) sum_l X_{l,i}.
inline Vector sufficient_statistic(const Dataset& data) {
  const std::size_t p = data.dimension();
  const std::size_t n = data.size();
  std::vector<std::size_t> counts(p, 0);
  for (std::size_t l = 0; l < n; ++l) {
    auto row = data.sample(l);
    for (std::size_t i = 0; i < p; ++i) counts[i] += row[i];
  }
  Vector t(p);
  for (std::size_t i = 0; i < p; ++i) t[i] = static_cast<double>(counts[i]) / static_cast<double>(n);
  return t;
}

// P(X_i = 1 | rest) for the anti-ferromagnetic model with fields theta:
// x_i = 1 disagrees with the n0 zero-neighbours, x_i = 0 with the n1 one-neighbours.
inline double heat_bath_probability(const Graph& graph, double beta, const ParamVector& theta,
                                    std::span<const std::uint8_t> x, std::size_t i) {
  std::size_t ones = 0;
  for (auto j : graph.neighbors(i)) ones += x[j];
  const double n1 = static_cast<double>(ones);
  const double n0 = static_cast<double>(graph.neighbors(i).size()) - n1;
  const double a1 = theta[i] + 2.0 * beta * n0;
  const double a0 = 2.0 * beta * n1;
  return 1.0 / (1.0 + std::exp(a0 - a1));
}

struct GibbsOptions {
  std::size_t burn_in_sweeps = 0;  // 0 selects the default of 100 p
  std::size_t thin_sweeps = 0;     // 0 selects the default of p
};

// Single-site heat-bath chain with systematic sweeps, started from a
// seed-drawn uniform state. Records one sample every thin_sweeps sweeps.
inline Dataset gibbs_sample(const Model& model, const ParamVector& theta, std::size_t n,
                            std::uint64_t seed, GibbsOptions opts = {}) {
  require(model.is_ising(), "gibbs_sample: requires an anti-ferromagnetic Ising model");
  require(n >= 1, "gibbs_sample: n must be positive");
  const std::size_t p = model.dimension();
  require(theta.size() == p, "gibbs_sample: theta length differs from p");
  const std::size_t burn_in = opts.burn_in_sweeps ? opts.burn_in_sweeps : 100 * p;
  const std::size_t thin = opts.thin_sweeps ? opts.thin_sweeps : p;

  const Graph& g = model.graph();
  const double beta = model.beta();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<std::uint8_t> x(p);
  for (auto& b : x) b = unif(rng) < 0.5 ? 1 : 0;

  auto sweep = [&] {
    for (std::size_t i = 0; i < p; ++i) {
      x[i] = unif(rng) < heat_bath_probability(g, beta, theta, x, i) ? 1 : 0;
    }
  };
  for (std::size_t s = 0; s < burn_in; ++s) sweep();

  std::vector<std::uint8_t> bits;
  bits.reserve(n * p);
  for (std::size_t l = 0; l < n; ++l) {
    for (std::size_t s = 0; s < thin; ++s) sweep();
    bits.insert(bits.end(), x.begin(), x.end());
  }
  return Dataset(p, std::move(bits), seed, "gibbs");
}

struct NeighborhoodCounts {
  std::size_t n0 = 0;  // X_i = 0 and all neighbours 0
  std::size_t n1 = 0;  // X_i = 1 and all neighbours 0
};

// Counts against an explicit neighbour list, so irregular neighbourhoods work too.
inline NeighborhoodCounts neighborhood_counts(const Dataset& data, std::span<const std::size_t> nbrs,
                                              std::size_t i) {
  const std::size_t p = data.dimension();
  require(i < p, "neighborhood_counts: vertex out of range");
  for (auto j : nbrs) require(j < p && j != i, "neighborhood_counts: bad neighbour index");
  NeighborhoodCounts c;
  for (std::size_t l = 0; l < data.size(); ++l) {
    auto row = data.sample(l);
    bool quiet = true;
    for (auto j : nbrs) {
      if (row[j]) { quiet = false; break; }
    }
    if (!quiet) continue;
    if (row[i]) ++c.n1; else ++c.n0;
  }
  return c;
}

inline NeighborhoodCounts neighborhood_counts(const Dataset& data, const Graph& graph,
                                              std::size_t i) {
  require(i < graph.vertex_count(), "neighborhood_counts: vertex out of range");
  require(data.dimension() == graph.vertex_count(), "neighborhood_counts: dataset and graph differ in p");
  return neighborhood_counts(data, std::span<const std::size_t>(graph.neighbors(i)), i);
}

// -2 beta k + log(N1 / N0); empty when either count is zero.
inline std::optional<double> field_from_counts(const NeighborhoodCounts& c, double beta, std::size_t k) {
  if (c.n0 == 0 || c.n1 == 0) return std::nullopt;
  return -2.0 * beta * static_cast<double>(k) +
         std::log(static_cast<double>(c.n1) / static_cast<double>(c.n0));
}

struct FieldEstimate {
  Vector theta_hat;  // NaN where invalid
  std::vector<bool> valid;
  std::vector<NeighborhoodCounts> counts;

  std::size_t valid_count() const {
    std::size_t c = 0;
    for (bool v : valid) c += v;
    return c;
  }
};

// theta_hat_i = -2 beta k + log(N_i(1;0) / N_i(0;0)). A coordinate with either
// count zero is flagged invalid and left as NaN.
inline FieldEstimate estimate_fields_from_samples(const Dataset& data, const Graph& graph,
                                                  double beta) {
  require(data.dimension() == graph.vertex_count(),
          "estimate_fields_from_samples: dataset and graph differ in p");
  const std::size_t p = graph.vertex_count();
  FieldEstimate est;
  est.theta_hat.assign(p, std::numeric_limits<double>::quiet_NaN());
  est.valid.assign(p, false);
  est.counts.resize(p);
  for (std::size_t i = 0; i < p; ++i) {
    const auto c = neighborhood_counts(data, graph, i);
    est.counts[i] = c;
    if (auto t = field_from_counts(c, beta, graph.neighbors(i).size())) {
      est.theta_hat[i] = *t;
      est.valid[i] = true;
    }
  }
  return est;
}

// Sup-norm error over all coordinates; +inf if any coordinate is invalid.
inline double max_field_error(const FieldEstimate& est, const ParamVector& theta) {
  double e = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    if (!est.valid[i]) return std::numeric_limits<double>::infinity();
    e = std::max(e, std::abs(est.theta_hat[i] - theta[i]));
  }
  return e;
}

// CSV: vertex,N0,N1,theta_hat,valid (vertices 1-indexed).
inline void write_estimate_csv(std::ostream& out, const FieldEstimate& est) {
  out << "vertex,N0,N1,theta_hat,valid\n";
  for (std::size_t i = 0; i < est.theta_hat.size(); ++i) {
    out << i + 1 << ',' << est.counts[i].n0 << ',' << est.counts[i].n1 << ',';
    if (est.valid[i]) {
      char buf[32];
      auto res = std::to_chars(buf, buf + sizeof(buf), est.theta_hat[i]);
      out.write(buf, res.ptr - buf);
    } else {
      out << "nan";
    }
    out << ',' << (est.valid[i] ? 1 : 0) << '\n';
  }
}

struct EstimatorConfig {
  double xi = 0.1;         // target sup-norm precision
  double Delta = 0.05;     // failure probability
  double theta_max = 1.0;  // prior bound on ||theta||_inf, >= 1
  double c_star = 1.0;     // calibration constant (depends on k, beta)

  void validate() const {
    require(std::isfinite(xi) && xi > 0.0, "estimator config: xi must be positive");
    require(Delta > 0.0 && Delta < 1.0, "estimator config: Delta must lie in (0,1)");
    require(std::isfinite(theta_max) && theta_max >= 1.0, "estimator config: theta_max must be >= 1");
    require(std::isfinite(c_star), "estimator config: C* must be finite");
  }
};

// n = ceil(exp(C* theta_max) xi^-2 log(p / Delta)). k and beta enter only
// through the calibrated C*.
inline std::size_t required_samples(const EstimatorConfig& cfg, std::size_t p,
                                    [[maybe_unused]] std::size_t k,
                                    [[maybe_unused]] double beta) {
  cfg.validate();
  require(p >= 1, "required_samples: p must be positive");
  const double n = std::exp(cfg.c_star * cfg.theta_max) / (cfg.xi * cfg.xi) *
                   std::log(static_cast<double>(p) / cfg.Delta);
  return static_cast<std::size_t>(std::ceil(std::max(n, 1.0)));
}

struct Calibration {
  double c_star = 0.0;
  std::size_t n = 0;
  double success_fraction = 0.0;
  std::size_t trials = 0;
  bool found = false;
};

// Smallest C* on `grid` (ascending) for which exact-sample trials at the
// resulting n reach ||theta_hat - theta||_inf <= xi in at least 1 - Delta of
// the trials, on an enumerable Ising model with planted theta.
inline Calibration calibrate_c_star(const Model& model, const ParamVector& theta,
                                    EstimatorConfig cfg, std::span<const double> grid,
                                    std::size_t trials, std::uint64_t seed) {
  require(model.is_ising(), "calibrate_c_star: requires an Ising model");
  require(trials >= 1, "calibrate_c_star: trials must be positive");
  const ExactEngine engine(model);
  const Graph& g = model.graph();
  Calibration out;
  out.trials = trials;
  for (double c : grid) {
    cfg.c_star = c;
    const std::size_t n = required_samples(cfg, model.dimension(), g.degree(), model.beta());
    std::size_t ok = 0;
    for (std::size_t t = 0; t < trials; ++t) {
      const auto data = exact_sample(engine, theta, n, seed + t);
      ok += max_field_error(estimate_fields_from_samples(data, g, model.beta()), theta) <= cfg.xi;
    }
    const double frac = static_cast<double>(ok) / static_cast<double>(trials);
    out.c_star = c;
    out.n = n;
    out.success_fraction = frac;
    if (frac >= 1.0 - cfg.Delta) {
      out.found = true;
      return out;
    }
  }
  return out;
}

// P(X_i = 1 | X_{N(i)} = 0) / P(X_i = 0 | X_{N(i)} = 0) by enumeration.
inline double exact_neighborhood_ratio(const ExactEngine& engine, const Graph& graph,
                                       const ParamVector& theta, std::size_t i) {
  const Vector w = engine.log_unnormalized(theta);
  State mask = 0;
  for (auto j : graph.neighbors(i)) mask |= State{1} << j;
  const State bit = State{1} << i;
  Vector on;
  Vector off;
  for (State x = 0; x < w.size(); ++x) {
    if (x & mask) continue;
    (x & bit ? on : off).push_back(w[x]);
  }
  return std::exp(log_sum_exp(on) - log_sum_exp(off));
}

}  // namespace suffstat
