#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "suffstat/sampling.hpp"

using namespace suffstat;

namespace {

Graph cycle(std::size_t p) {
  std::vector<Edge> e;
  for (std::size_t i = 0; i < p; ++i) e.emplace_back(i, (i + 1) % p);
  return Graph(p, 2, e);
}

Graph complete4() { return Graph(4, 3, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}); }

ParamVector uniform_theta(std::size_t p, double range, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-range, range);
  Vector t(p);
  for (double& v : t) v = u(rng);
  return ParamVector(t);
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

TEST(SufficientStatistic, Examples) {
  const auto d = Dataset::from_rows({{0, 1}, {1, 1}});
  EXPECT_EQ(sufficient_statistic(d), (Vector{0.5, 1.0}));
  const auto same = Dataset::from_rows({{1, 0, 1}, {1, 0, 1}, {1, 0, 1}});
  EXPECT_EQ(sufficient_statistic(same), (Vector{1.0, 0.0, 1.0}));
  const auto flat = build_dense_model(3, Vector(8, 0.0));
  const auto t = sufficient_statistic(exact_sample(flat, ParamVector::zeros(3), 10000, 5));
  for (double v : t) EXPECT_NEAR(v, 0.5, 0.02);
}

TEST(Dataset, RejectsBadShapes) {
  EXPECT_THROW(Dataset(2, {0, 1, 1}), Error);
  EXPECT_THROW(Dataset(2, {}), Error);
  EXPECT_THROW(Dataset(2, {0, 2}), Error);
  EXPECT_THROW(Dataset::from_rows({{0, 1}, {1}}), Error);
}

TEST(Dataset, FileRoundTrip) {
  const auto d = exact_sample(build_antiferro_ising(cycle(5), 0.3), ParamVector::zeros(5), 37, 9);
  std::stringstream ss;
  write_dataset(ss, d);
  EXPECT_EQ(read_dataset(ss), d);
  std::istringstream truncated("2 3\n0 1\n1 1\n");
  EXPECT_THROW(read_dataset(truncated), Error);
  std::istringstream trailing("2 1\n0 1\n1\n");
  EXPECT_THROW(read_dataset(trailing), Error);
  std::istringstream nonbit("2 1\n0 3\n");
  EXPECT_THROW(read_dataset(nonbit), Error);
}

TEST(HeatBath, AllNeighboursZero) {
  const double beta = 0.7;
  const auto g = complete4();
  const std::vector<std::uint8_t> x(4, 0);
  const double e = std::exp(2.0 * beta * 3.0);
  EXPECT_NEAR(heat_bath_probability(g, beta, ParamVector::zeros(4), x, 0), e / (e + 1.0), 1e-15);
}

TEST(HeatBath, MatchesEnumeratedConditional) {
  const auto g = cycle(5);
  const double beta = 0.45;
  const auto m = build_antiferro_ising(g, beta);
  const auto th = uniform_theta(5, 1.0, 3);
  const ExactEngine engine(m);
  const Vector w = engine.log_unnormalized(th);
  for (State x = 0; x < 32; ++x) {
    const auto bits = unpack_state(x, 5);
    for (std::size_t i = 0; i < 5; ++i) {
      const State on = x | (State{1} << i);
      const State off = x & ~(State{1} << i);
      const double expected = 1.0 / (1.0 + std::exp(w[off] - w[on]));
      EXPECT_NEAR(heat_bath_probability(g, beta, th, bits, i), expected, 1e-13);
    }
  }
}

TEST(Gibbs, MarginalsMatchEnumeration) {
  const auto g = random_regular_graph(10, 3, 4);
  const auto m = build_antiferro_ising(g, 0.3);
  const auto th = uniform_theta(10, 0.5, 8);
  const auto d = gibbs_sample(m, th, 100000, 21);
  EXPECT_EQ(d.sampler(), "gibbs");
  EXPECT_EQ(d.size(), 100000u);
  const auto emp = sufficient_statistic(d);
  const auto exact = moment_map(m, th);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_NEAR(emp[i], exact[i], 0.02) << "i=" << i;
}

TEST(Gibbs, SeedDeterminesChain) {
  const auto m = build_antiferro_ising(cycle(6), 0.5);
  const auto a = gibbs_sample(m, ParamVector::zeros(6), 50, 77, {10, 2});
  const auto b = gibbs_sample(m, ParamVector::zeros(6), 50, 77, {10, 2});
  const auto c = gibbs_sample(m, ParamVector::zeros(6), 50, 78, {10, 2});
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  EXPECT_EQ(a.seed(), 77u);
}

TEST(Gibbs, RejectsDenseModel) {
  const auto dense = build_dense_model(2, Vector(4, 0.0));
  EXPECT_THROW(gibbs_sample(dense, ParamVector::zeros(2), 10, 1), Error);
}

TEST(NeighborhoodCounts, PathExample) {
  // Path 1-2-3, vertex 2 (0-indexed 1) has neighbours {0, 2}.
  const auto d = Dataset::from_rows({{0, 1, 0}, {0, 0, 0}, {0, 1, 0}, {1, 1, 1}});
  const std::vector<std::size_t> nbrs{0, 2};
  const auto c = neighborhood_counts(d, nbrs, 1);
  EXPECT_EQ(c.n0, 1u);
  EXPECT_EQ(c.n1, 2u);
  EXPECT_THROW(neighborhood_counts(d, nbrs, 3), Error);
}

TEST(NeighborhoodCounts, NoQuietNeighbourhood) {
  const auto d = Dataset::from_rows({{1, 1, 0}, {0, 1, 1}});
  const auto c = neighborhood_counts(d, cycle(3), 0);
  EXPECT_EQ(c.n0, 0u);
  EXPECT_EQ(c.n1, 0u);
}

TEST(NeighborhoodCounts, EmptyNeighbourhoodCountsEverything) {
  const Graph g(3, 0, {});
  const auto d = Dataset::from_rows({{1, 1, 0}, {0, 1, 1}, {1, 0, 0}});
  const auto c = neighborhood_counts(d, g, 0);
  EXPECT_EQ(c.n0, 1u);
  EXPECT_EQ(c.n1, 2u);
  EXPECT_THROW(neighborhood_counts(d, g, 3), Error);
}

TEST(Estimator, CountExamples) {
  EXPECT_NEAR(*field_from_counts({10, 30}, 0.2, 3), -1.2 + std::log(3.0), 1e-15);
  EXPECT_NEAR(*field_from_counts({10, 30}, 0.2, 3), -0.101388, 1e-6);
  EXPECT_EQ(*field_from_counts({7, 7}, 0.35, 4), -2.0 * 0.35 * 4.0);
  EXPECT_FALSE(field_from_counts({0, 5}, 0.2, 3).has_value());
}

TEST(Estimator, DatasetExample) {
  // K4: vertex 0 sees 30 samples with X_0 = 1 and 10 with X_0 = 0 among quiet
  // neighbourhoods; the extra rows never have a quiet neighbourhood for vertex 0.
  std::vector<std::vector<std::uint8_t>> rows;
  for (int r = 0; r < 30; ++r) rows.push_back({1, 0, 0, 0});
  for (int r = 0; r < 10; ++r) rows.push_back({0, 0, 0, 0});
  for (int r = 0; r < 5; ++r) rows.push_back({0, 1, 1, 0});
  const auto est = estimate_fields_from_samples(Dataset::from_rows(rows), complete4(), 0.2);
  EXPECT_TRUE(est.valid[0]);
  EXPECT_NEAR(est.theta_hat[0], -1.2 + std::log(3.0), 1e-15);
  EXPECT_EQ(est.counts[0].n0, 10u);
  EXPECT_EQ(est.counts[0].n1, 30u);
  // The other vertices never take value 1 with a quiet neighbourhood, so they
  // are flagged rather than given -inf.
  EXPECT_FALSE(est.valid[3]);
  EXPECT_TRUE(std::isnan(est.theta_hat[3]));
  EXPECT_EQ(est.valid_count(), 1u);
  EXPECT_TRUE(std::isinf(max_field_error(est, ParamVector::zeros(4))));
}

TEST(Estimator, CsvReport) {
  const auto d = Dataset::from_rows({{1, 0, 0}, {0, 0, 0}, {0, 1, 0}, {0, 0, 0}});
  const auto est = estimate_fields_from_samples(d, cycle(3), 0.0);
  std::ostringstream out;
  write_estimate_csv(out, est);
  EXPECT_EQ(out.str(),
            "vertex,N0,N1,theta_hat,valid\n"
            "1,2,1,-0.6931471805599453,1\n"
            "2,2,1,-0.6931471805599453,1\n"
            "3,2,0,nan,0\n");
}

TEST(Estimator, UsesMoreThanSufficientStatistic) {
  // Same column sums, different joint structure around vertex 1 of a 4-cycle.
  const auto a = Dataset::from_rows({{0, 1, 0, 0}, {0, 0, 0, 0}, {1, 0, 1, 0}, {0, 1, 0, 0}});
  const auto b = Dataset::from_rows({{1, 1, 0, 0}, {0, 0, 0, 0}, {0, 0, 1, 0}, {0, 1, 0, 0}});
  ASSERT_EQ(sufficient_statistic(a), sufficient_statistic(b));
  const auto ea = estimate_fields_from_samples(a, cycle(4), 0.3);
  const auto eb = estimate_fields_from_samples(b, cycle(4), 0.3);
  ASSERT_TRUE(ea.valid[1]);
  ASSERT_TRUE(eb.valid[1]);
  EXPECT_NEAR(ea.theta_hat[1], -1.2 + std::log(2.0), 1e-15);
  EXPECT_NEAR(eb.theta_hat[1], -1.2, 1e-15);
}

TEST(RequiredSamples, Examples) {
  EstimatorConfig cfg{0.5, 0.05, 1.0, 1.0};
  EXPECT_EQ(required_samples(cfg, 10, 3, 0.2), 58u);
  const auto base = required_samples(cfg, 10, 3, 0.2);
  cfg.xi = 0.25;
  const auto halved = required_samples(cfg, 10, 3, 0.2);
  EXPECT_GE(halved, 4 * base - 4);
  EXPECT_LE(halved, 4 * base);
  std::size_t prev = 0;
  for (double Delta : {0.5, 0.2, 0.1, 0.05, 0.01, 1e-4, 1e-8}) {
    cfg.Delta = Delta;
    const auto n = required_samples(cfg, 10, 3, 0.2);
    EXPECT_GE(n, prev);
    prev = n;
  }
}

TEST(RequiredSamples, RejectsBadConfig) {
  EXPECT_THROW(required_samples({0.0, 0.05, 1.0, 1.0}, 10, 3, 0.2), Error);
  EXPECT_THROW(required_samples({0.1, 1.0, 1.0, 1.0}, 10, 3, 0.2), Error);
  EXPECT_THROW(required_samples({0.1, 0.05, 0.5, 1.0}, 10, 3, 0.2), Error);
}

TEST(RatioIdentity, ConditionalRatioIsExponentialOfField) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const std::size_t p = 6 + seed % 3;
    const std::size_t k = (p % 2 == 1) ? 2 : 3;
    const auto g = random_regular_graph(p, k, seed);
    const double beta = 0.2 + 0.1 * seed;
    const ExactEngine engine(build_antiferro_ising(g, beta));
    const auto th = uniform_theta(p, 1.0, 100 + seed);
    for (std::size_t i = 0; i < p; ++i) {
      const double expected = std::exp(2.0 * beta * k + th[i]);
      EXPECT_NEAR(exact_neighborhood_ratio(engine, g, th, i) / expected, 1.0, 1e-10);
    }
  }
}

TEST(Consistency, MedianErrorShrinksWithSampleSize) {
  const auto g = cycle(8);
  const auto m = build_antiferro_ising(g, 0.4);
  const ExactEngine engine(m);
  const auto th = uniform_theta(8, 0.5, 11);
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t n : {1000u, 10000u, 100000u}) {
    std::vector<double> errs;
    for (std::uint64_t t = 0; t < 10; ++t) {
      const auto d = exact_sample(engine, th, n, 1000 * n + t);
      errs.push_back(max_field_error(estimate_fields_from_samples(d, g, 0.4), th));
    }
    const double med = median(errs);
    EXPECT_LE(med, prev) << "n=" << n;
    prev = med;
  }
  EXPECT_LT(prev, 0.1);
}

TEST(Calibration, FindsConstantMeetingTarget) {
  const auto m = build_antiferro_ising(cycle(4), 0.2);
  const auto th = uniform_theta(4, 0.5, 2);
  EstimatorConfig cfg{0.5, 0.1, 1.0, 1.0};
  const std::vector<double> grid{0.5, 1.0, 2.0, 4.0};
  const auto cal = calibrate_c_star(m, th, cfg, grid, 20, 5);
  ASSERT_TRUE(cal.found);
  EXPECT_GE(cal.success_fraction, 0.9);
  cfg.c_star = cal.c_star;
  EXPECT_EQ(cal.n, required_samples(cfg, 4, 2, 0.2));
}
