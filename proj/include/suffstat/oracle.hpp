#pragma once

#include <cmath>
#include <cstdint>
#include <ostream>
#include <random>
#include <string>

#include "json.hpp"
#include "suffstat/exact.hpp"
#include "suffstat/linalg.hpp"
#include "suffstat/model.hpp"

namespace suffstat {

struct NewtonOptions {
  int max_iterations = 200;
  int max_halvings = 50;
};

// Inverse of the moment map by damped Newton on the exact engine. The step is
// Cov^{-1} (tau - tau*(theta)); it is halved until the sup-norm residual
// decreases. Starts from the coordinatewise logit of tau.
inline ParamVector invert_moment_map(const ExactEngine& engine, const MomentVector& tau,
                                     double tol, const NewtonOptions& opts = {}) {
  const std::size_t p = engine.dimension();
  require(tau.size() == p, "invert_moment_map: tau length differs from p");
  require(tau.is_interior(), "invert_moment_map: tau must lie in (0,1)^p");
  require(tol > 0.0, "invert_moment_map: tol must be positive");

  Vector theta(p);
  for (std::size_t i = 0; i < p; ++i) theta[i] = logit(tau[i]);

  auto mo = engine.moments(ParamVector(theta), true);
  Vector residual(p);
  auto fill_residual = [&](const Vector& t) {
    for (std::size_t i = 0; i < p; ++i) residual[i] = tau[i] - t[i];
    return norm_inf(residual);
  };
  double err = fill_residual(mo.tau);

  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    if (err <= tol) return ParamVector(std::move(theta));
    auto step = linalg::cholesky_solve(mo.covariance, residual);
    if (!step) break;

    double scale = 1.0;
    bool improved = false;
    for (int h = 0; h <= opts.max_halvings; ++h, scale *= 0.5) {
      Vector trial(p);
      for (std::size_t i = 0; i < p; ++i) trial[i] = theta[i] + scale * (*step)[i];
      bool finite = true;
      for (double v : trial) finite = finite && std::isfinite(v);
      if (!finite) continue;
      auto trial_mo = engine.moments(ParamVector(trial), true);
      Vector saved = residual;
      const double trial_err = fill_residual(trial_mo.tau);
      if (trial_err < err) {
        theta = std::move(trial);
        mo = std::move(trial_mo);
        err = trial_err;
        improved = true;
        break;
      }
      residual = std::move(saved);
    }
    if (!improved) break;
  }
  if (err <= tol) return ParamVector(std::move(theta));
  fail(ErrorKind::non_convergence,
       "invert_moment_map: no convergence (tau too close to the boundary for tol?)");
}

inline ParamVector invert_moment_map(const Model& model, const MomentVector& tau, double tol) {
  return invert_moment_map(ExactEngine(model), tau, tol);
}

// F(tau) = A(theta*(tau)) - <tau, theta*(tau)>.
inline double free_energy(const ExactEngine& engine, const MomentVector& tau, double tol) {
  const auto theta = invert_moment_map(engine, tau, tol);
  return engine.log_partition(theta) - dot(tau.values(), theta.values());
}

inline double free_energy(const Model& model, const MomentVector& tau, double tol) {
  return free_energy(ExactEngine(model), tau, tol);
}

enum class NoiseMode { exact, sphere };

inline std::string to_string(NoiseMode m) { return m == NoiseMode::exact ? "exact" : "sphere"; }

// Simulated parameter estimator from sufficient statistics: each reply lies
// within l2 distance xi of theta*(tau). Sphere mode puts it at distance exactly
// xi in a uniformly random direction. Not thread-safe (counter and RNG state).
class Oracle {
 public:
  Oracle(const Model& model, double xi, NoiseMode mode, std::uint64_t seed,
         double newton_tol = 1e-12)
      : engine_(model), xi_(xi), mode_(mode), seed_(seed), rng_(seed), newton_tol_(newton_tol) {
    require(std::isfinite(xi) && xi >= 0.0, "oracle: xi must be >= 0");
  }

  ParamVector query(const MomentVector& tau) {
    ++query_count_;
    ParamVector exact = invert_moment_map(engine_, tau, newton_tol_);
    ParamVector reply = exact;
    if (mode_ == NoiseMode::sphere && xi_ > 0.0) {
      const std::size_t p = exact.size();
      Vector dir(p);
      double nrm = 0.0;
      while (nrm == 0.0) {
        for (double& d : dir) d = normal_(rng_);
        nrm = norm2(dir);
      }
      Vector noisy = exact.values();
      for (std::size_t i = 0; i < p; ++i) noisy[i] += xi_ * dir[i] / nrm;
      reply = ParamVector(std::move(noisy));
    }
    if (log_) {
      *log_ << nlohmann::json{{"tau", tau.values()}, {"reply", reply.values()}, {"xi", xi_}}.dump()
            << '\n';
    }
    return reply;
  }

  double xi() const noexcept { return xi_; }
  NoiseMode mode() const noexcept { return mode_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::size_t query_count() const noexcept { return query_count_; }
  const ExactEngine& engine() const noexcept { return engine_; }

  // Emit one JSON line per query to `out`; nullptr disables.
  void set_query_log(std::ostream* out) noexcept { log_ = out; }

 private:
  ExactEngine engine_;
  double xi_;
  NoiseMode mode_;
  std::uint64_t seed_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_;
  double newton_tol_;
  std::size_t query_count_ = 0;
  std::ostream* log_ = nullptr;
};

inline Oracle make_noisy_oracle(const Model& model, double xi, NoiseMode mode,
                                std::uint64_t seed) {
  return Oracle(model, xi, mode, seed);
}

}  // namespace suffstat
