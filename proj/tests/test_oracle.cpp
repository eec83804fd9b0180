#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "json.hpp"
#include "suffstat/oracle.hpp"

using namespace suffstat;

namespace {

const double kE = std::exp(1.0);

Model flat(std::size_t p) { return build_dense_model(p, Vector(std::size_t{1} << p, 0.0)); }
Model single_edge() { return build_antiferro_ising(Graph(2, 1, {{0, 1}}), 0.5); }

Model random_dense(std::size_t p, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vector t(std::size_t{1} << p);
  for (double& v : t) v = u(rng);
  return build_dense_model(p, std::move(t));
}

Vector uniform_vec(std::size_t p, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vector v(p);
  for (double& x : v) x = u(rng);
  return v;
}

}  // namespace

TEST(InvertMomentMap, Examples) {
  EXPECT_NEAR(invert_moment_map(flat(1), MomentVector({0.5}), 1e-12)[0], 0.0, 1e-12);
  const double tau = 0.731059;
  EXPECT_NEAR(invert_moment_map(flat(1), MomentVector({tau}), 1e-12)[0], std::log(tau / (1 - tau)), 1e-10);
  EXPECT_NEAR(invert_moment_map(flat(1), MomentVector({tau}), 1e-12)[0], 1.0, 1e-5);
  const auto th = invert_moment_map(single_edge(), MomentVector({0.5, 0.5}), 1e-12);
  EXPECT_NEAR(th[0], 0.0, 1e-10);
  EXPECT_NEAR(th[1], 0.0, 1e-10);
}

TEST(InvertMomentMap, RejectsBadInput) {
  EXPECT_THROW(MomentVector({0.0}), Error);
  EXPECT_THROW(MomentVector({1.0}), Error);
  EXPECT_THROW(invert_moment_map(flat(1), MomentVector({0.5}), 0.0), Error);
  EXPECT_THROW(invert_moment_map(flat(2), MomentVector({0.5}), 1e-8), Error);
}

TEST(InvertMomentMap, UnreachableToleranceIsAnError) {
  std::mt19937_64 rng(3);
  const auto m = random_dense(4, rng);
  try {
    invert_moment_map(m, MomentVector(Vector(4, 0.3)), 1e-300);
    FAIL() << "expected non-convergence";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::non_convergence);
  }
}

TEST(InvertMomentMap, ResidualWithinTolerance) {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 20; ++t) {
    const std::size_t p = 1 + t % 6;
    const auto m = random_dense(p, rng);
    const MomentVector tau(uniform_vec(p, rng, 0.02, 0.98));
    const ExactEngine engine(m);
    const auto th = invert_moment_map(engine, tau, 1e-9);
    const auto back = engine.moment_map(th);
    for (std::size_t i = 0; i < p; ++i) EXPECT_LE(std::abs(back[i] - tau[i]), 1e-9);
  }
}

TEST(InvertMomentMap, RoundTrip) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 30; ++t) {
    const std::size_t p = 2 + t % 7;
    const auto m = random_dense(p, rng);
    const ParamVector th(uniform_vec(p, rng, -2.0, 2.0));
    const ExactEngine engine(m);
    const auto back = invert_moment_map(engine, engine.moment_map(th), 1e-8);
    for (std::size_t i = 0; i < p; ++i) EXPECT_NEAR(back[i], th[i], 1e-6);
  }
}

TEST(FreeEnergy, Examples) {
  EXPECT_NEAR(free_energy(flat(1), MomentVector({0.5}), 1e-12), std::log(2.0), 1e-12);
  EXPECT_NEAR(free_energy(single_edge(), MomentVector({0.5, 0.5}), 1e-12), std::log(2.0 + 2.0 * kE), 1e-12);
  EXPECT_NEAR(free_energy(single_edge(), MomentVector({0.5, 0.5}), 1e-12), 2.0064089, 1e-6);
  // For h = 1 the free energy is the sum of binary entropies.
  const double s = -0.25 * std::log(0.25) - 0.75 * std::log(0.75);
  EXPECT_NEAR(free_energy(flat(1), MomentVector({0.25}), 1e-12), s, 1e-12);
  EXPECT_NEAR(s, 0.562335, 1e-6);
  EXPECT_NEAR(free_energy(flat(3), MomentVector({0.25, 0.5, 0.9}), 1e-12),
              binary_entropy(0.25) + binary_entropy(0.5) + binary_entropy(0.9), 1e-12);
}

TEST(FreeEnergy, LegendreDuality) {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 30; ++t) {
    const std::size_t p = 2 + t % 7;
    const auto m = random_dense(p, rng);
    const ParamVector th(uniform_vec(p, rng, -2.0, 2.0));
    const ExactEngine engine(m);
    const auto tau = engine.moment_map(th);
    const double F = free_energy(engine, tau, 1e-10);
    EXPECT_NEAR(engine.log_partition(th), F + dot(tau.values(), th.values()), 1e-8);
  }
}

TEST(FreeEnergy, GradientIsMinusInverse) {
  std::mt19937_64 rng(7);
  const double h = 1e-4;
  for (int t = 0; t < 10; ++t) {
    const std::size_t p = 1 + t % 5;
    const auto m = random_dense(p, rng);
    const ExactEngine engine(m);
    const Vector tau = uniform_vec(p, rng, 0.15, 0.85);
    const auto th = invert_moment_map(engine, MomentVector(tau), 1e-12);
    for (std::size_t i = 0; i < p; ++i) {
      Vector up = tau, dn = tau;
      up[i] += h;
      dn[i] -= h;
      const double fd = (free_energy(engine, MomentVector(up), 1e-12) - free_energy(engine, MomentVector(dn), 1e-12)) / (2 * h);
      EXPECT_NEAR(fd, -th[i], 1e-4);
    }
  }
}

TEST(FreeEnergy, Concavity) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> lam(0.0, 1.0);
  for (int t = 0; t < 40; ++t) {
    const std::size_t p = 1 + t % 5;
    const auto m = random_dense(p, rng);
    const ExactEngine engine(m);
    const Vector a = uniform_vec(p, rng, 0.05, 0.95);
    const Vector b = uniform_vec(p, rng, 0.05, 0.95);
    const double l = lam(rng);
    Vector mid(p);
    for (std::size_t i = 0; i < p; ++i) mid[i] = l * a[i] + (1 - l) * b[i];
    const double lhs = free_energy(engine, MomentVector(mid), 1e-12);
    const double rhs = l * free_energy(engine, MomentVector(a), 1e-12) + (1 - l) * free_energy(engine, MomentVector(b), 1e-12);
    EXPECT_GE(lhs, rhs - 1e-8);
  }
}

TEST(Oracle, ExactModeReturnsInverse) {
  std::mt19937_64 rng(9);
  const auto m = random_dense(3, rng);
  auto oracle = make_noisy_oracle(m, 0.0, NoiseMode::sphere, 1);
  const MomentVector tau({0.3, 0.6, 0.45});
  const auto reply = oracle.query(tau);
  const auto direct = invert_moment_map(ExactEngine(m), tau, 1e-12);
  EXPECT_EQ(reply, direct);
  EXPECT_EQ(oracle.query_count(), 1u);
}

TEST(Oracle, SphereNoiseHasRadiusXi) {
  std::mt19937_64 rng(10);
  const auto m = random_dense(4, rng);
  auto oracle = make_noisy_oracle(m, 0.01, NoiseMode::sphere, 2);
  const ExactEngine engine(m);
  for (int q = 0; q < 20; ++q) {
    const MomentVector tau(uniform_vec(4, rng, 0.1, 0.9));
    const auto reply = oracle.query(tau);
    const auto exact = invert_moment_map(engine, tau, 1e-12);
    Vector d(4);
    for (std::size_t i = 0; i < 4; ++i) d[i] = reply[i] - exact[i];
    EXPECT_NEAR(norm2(d), 0.01, 1e-12);
  }
  EXPECT_EQ(oracle.query_count(), 20u);
}

TEST(Oracle, DeterministicPerSeed) {
  const auto m = single_edge();
  auto a = make_noisy_oracle(m, 0.05, NoiseMode::sphere, 77);
  auto b = make_noisy_oracle(m, 0.05, NoiseMode::sphere, 77);
  auto c = make_noisy_oracle(m, 0.05, NoiseMode::sphere, 78);
  const std::vector<MomentVector> taus{MomentVector({0.3, 0.4}), MomentVector({0.5, 0.5}),
                                       MomentVector({0.8, 0.1})};
  bool any_diff = false;
  for (const auto& t : taus) {
    const auto ra = a.query(t);
    EXPECT_EQ(ra, b.query(t));
    any_diff = any_diff || !(ra == c.query(t));
  }
  EXPECT_TRUE(any_diff);
}

TEST(Oracle, RejectsNegativeXiAndLogsQueries) {
  EXPECT_THROW(make_noisy_oracle(single_edge(), -0.1, NoiseMode::exact, 1), Error);
  auto oracle = make_noisy_oracle(single_edge(), 0.0, NoiseMode::exact, 1);
  std::ostringstream log;
  oracle.set_query_log(&log);
  oracle.query(MomentVector({0.4, 0.4}));
  oracle.query(MomentVector({0.6, 0.3}));
  std::istringstream lines(log.str());
  std::string line;
  int count = 0;
  while (std::getline(lines, line)) {
    const auto j = nlohmann::json::parse(line);
    EXPECT_EQ(j.at("tau").size(), 2u);
    EXPECT_EQ(j.at("reply").size(), 2u);
    EXPECT_EQ(j.at("xi").get<double>(), 0.0);
    ++count;
  }
  EXPECT_EQ(count, 2);
}
