#include "fbmlt/errors.h"
#include "fbmlt/grid.h"
#include "fbmlt/parallel.h"
#include "fbmlt/rng.h"
#include "fbmlt/stats.h"

#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <stdexcept>
#include <vector>

using namespace fbmlt;

TEST(TimeGrid, EndpointsAndStep) {
  const TimeGrid g(0.1, 1.0, 9);
  EXPECT_EQ(g.n_points(), 10u);
  EXPECT_DOUBLE_EQ(g.step(), 0.1);
  EXPECT_EQ(g.time(0), 0.1);
  EXPECT_EQ(g.time(9), 1.0);
  EXPECT_EQ(g.times().size(), 10u);
}

TEST(TimeGrid, CellOfClampsToGrid) {
  const TimeGrid g(0.0, 1.0, 4);
  EXPECT_EQ(g.cell_of(-1.0), 0u);
  EXPECT_EQ(g.cell_of(0.3), 1u);
  EXPECT_EQ(g.cell_of(1.0), 3u);
  EXPECT_EQ(g.cell_of(2.0), 3u);
}

TEST(TimeGrid, CoarsenedSharesPoints) {
  const TimeGrid g(0.0, 2.0, 16);
  const TimeGrid c = g.coarsened(4);
  EXPECT_EQ(c.n_steps(), 4u);
  for (std::size_t k = 0; k <= 4; ++k) EXPECT_DOUBLE_EQ(c.time(k), g.time(4 * k));
  EXPECT_THROW(g.coarsened(3), std::invalid_argument);
}

TEST(TimeGrid, RejectsBadInput) {
  EXPECT_THROW(TimeGrid(1.0, 1.0, 4), std::invalid_argument);
  EXPECT_THROW(TimeGrid(0.0, 1.0, 0), std::invalid_argument);
}

TEST(HurstParameter, Gates) {
  EXPECT_THROW(HurstParameter(0.0), std::invalid_argument);
  EXPECT_THROW(HurstParameter(1.0), std::invalid_argument);
  EXPECT_TRUE(HurstParameter(0.3).admits_local_time(3));
  EXPECT_FALSE(HurstParameter(0.6).admits_local_time(2));
  EXPECT_TRUE(HurstParameter(0.3).admits_regularity(1));
  EXPECT_FALSE(HurstParameter(0.25).admits_regularity(1));
  EXPECT_FALSE(HurstParameter(0.3).admits_regularity(2));
}

TEST(Rng, DeriveSeedIsDeterministicAndSpread) {
  EXPECT_EQ(derive_seed(7, 3, 1), derive_seed(7, 3, 1));
  std::set<std::uint64_t> seen;
  for (std::uint64_t r = 0; r < 1000; ++r) seen.insert(derive_seed(42, r));
  EXPECT_EQ(seen.size(), 1000u);
  EXPECT_NE(derive_seed(1, 2, 3), derive_seed(1, 3, 2));
}

TEST(Rng, NormalStreamMoments) {
  NormalStream s(derive_seed(5, 0));
  std::vector<double> v(200000);
  s.fill(v);
  EXPECT_NEAR(mean(v), 0.0, 5.0 / std::sqrt(200000.0));
  EXPECT_NEAR(stddev(v), 1.0, 0.01);
}

TEST(Stats, FitLineExact) {
  const std::vector<double> x{0, 1, 2, 3, 4};
  std::vector<double> y;
  for (double v : x) y.push_back(2.5 - 0.75 * v);
  const auto f = fit_line(x, y);
  EXPECT_NEAR(f.slope, -0.75, 1e-14);
  EXPECT_NEAR(f.intercept, 2.5, 1e-14);
  EXPECT_NEAR(f.r_squared, 1.0, 1e-14);
  EXPECT_NEAR(f.slope_stderr, 0.0, 1e-12);
}

TEST(Stats, FitLineStderrMatchesFormula) {
  const std::vector<double> x{0, 1, 2, 3};
  const std::vector<double> y{0, 1.1, 1.9, 3.2};
  const auto f = fit_line(x, y);
  // Residual variance / Sxx computed by hand.
  const double sxx = 5.0;
  double sse = 0.0;
  for (std::size_t i = 0; i < 4; ++i) sse += std::pow(y[i] - f.intercept - f.slope * x[i], 2);
  EXPECT_NEAR(f.slope_stderr, std::sqrt(sse / 2.0 / sxx), 1e-14);
}

TEST(Stats, MedianAndQuantile) {
  const std::vector<double> odd{5, 1, 3};
  const std::vector<double> even{4, 1, 3, 2};
  EXPECT_EQ(median(odd), 3.0);
  EXPECT_EQ(median(even), 2.5);
  EXPECT_EQ(quantile_lower(even, 0.5), 2.0);
  EXPECT_EQ(quantile_lower(even, 1.0), 4.0);
}

TEST(Stats, PoolMedianDeterministicAndCovers) {
  std::vector<double> v;
  for (int i = 0; i < 21; ++i) v.push_back(0.5 + 0.01 * (i - 10));
  const auto a = pool_median(v);
  const auto b = pool_median(v);
  EXPECT_EQ(a.median, 0.5);
  EXPECT_EQ(a.ci_low, b.ci_low);
  EXPECT_EQ(a.ci_high, b.ci_high);
  EXPECT_LE(a.ci_low, a.median);
  EXPECT_GE(a.ci_high, a.median);
}

TEST(Parallel, ResultIndependentOfThreads) {
  auto f = [](std::size_t i) {
    NormalStream s(derive_seed(9, i));
    return s();
  };
  const auto one = parallel_map(100, 1, f);
  const auto many = parallel_map(100, 8, f);
  EXPECT_EQ(one, many);
}

TEST(Parallel, PropagatesException) {
  auto f = [](std::size_t i) -> int {
    if (i == 17) throw std::runtime_error("boom");
    return 0;
  };
  EXPECT_THROW(parallel_map(50, 4, f), std::runtime_error);
}

TEST(Errors, ConfigErrorJoinsIssues) {
  const ConfigError e({"h: bad", "d: bad"});
  EXPECT_EQ(e.issues().size(), 2u);
  EXPECT_NE(std::string(e.what()).find("h: bad"), std::string::npos);
}
