#include "fbmlt/errors.h"
#include "fbmlt/fbm.h"
#include "fbmlt/local_time.h"
#include "fbmlt/stats.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

using namespace fbmlt;

namespace {

std::vector<double> sampled(std::size_t n, double (*f)(double)) {
  std::vector<double> v(n + 1);
  for (std::size_t k = 0; k <= n; ++k) v[k] = f(static_cast<double>(k) / static_cast<double>(n));
  return v;
}

double identity(double t) { return t; }
double tent(double t) { return 2.0 * std::abs(t - 0.5); }
double twice(double t) { return 2.0 * t; }

} // namespace

TEST(Occupation, LinearPathInterval) {
  const auto v = sampled(10, identity);
  const PathView p(TimeGrid(0.0, 1.0, 10), 1, v);
  EXPECT_NEAR(occupation_measure(p, 0.0, 1.0, Interval{0.2, 0.5}), 0.3, 1e-15);
  EXPECT_NEAR(occupation_measure(p, 0.33, 1.0, Interval{0.2, 0.5}), 0.17, 1e-15);
  EXPECT_NEAR(occupation_measure(p, 0.0, 1.0, Interval{0.5, 0.2}), 0.0, 0.0);
  EXPECT_NEAR(occupation_measure(p, 0.0, 1.0, Interval{-INFINITY, INFINITY}), 1.0, 1e-15);
}

TEST(Occupation, TentPathInterval) {
  const auto v = sampled(7, tent);  // kink not on a node
  const PathView p(TimeGrid(0.0, 1.0, 7), 1, v);
  // Interpolant of the samples: compute the reference on a fine sub-grid.
  double ref = 0.0;
  const std::size_t m = 700000;
  for (std::size_t i = 0; i < m; ++i) {
    const double t = (i + 0.5) / m;
    const std::size_t k = std::min<std::size_t>(6, static_cast<std::size_t>(t * 7));
    const double w = t * 7 - k;
    const double x = v[k] + w * (v[k + 1] - v[k]);
    if (x >= 0.1 && x <= 0.6) ref += 1.0 / m;
  }
  EXPECT_NEAR(occupation_measure(p, 0.0, 1.0, Interval{0.1, 0.6}), ref, 1e-5);
}

TEST(Occupation, StraightLineBallChord) {
  std::vector<double> v(2 * 11);
  for (std::size_t k = 0; k <= 10; ++k) {
    v[k] = k / 10.0;
    v[11 + k] = 0.0;
  }
  const PathView p(TimeGrid(0.0, 1.0, 10), 2, v);
  Ball b{{0.5, 0.1}, 0.2};
  EXPECT_NEAR(occupation_measure(p, 0.0, 1.0, b), 2.0 * std::sqrt(0.04 - 0.01), 1e-14);
  EXPECT_THROW(occupation_measure(p, 0.0, 1.0, Interval{0.0, 1.0}), DimensionMismatch);
}

TEST(Occupation, RangeChecks) {
  const auto v = sampled(4, identity);
  const PathView p(TimeGrid(0.0, 1.0, 4), 1, v);
  EXPECT_THROW(occupation_measure(p, -0.1, 0.5, Interval{0, 1}), OutOfRangeError);
  EXPECT_THROW(occupation_measure(p, 0.6, 0.5, Interval{0, 1}), OutOfRangeError);
  EXPECT_THROW(occupation_measure(p, 0.0, 1.5, Interval{0, 1}), OutOfRangeError);
}

TEST(Occupation, BallConstants) {
  EXPECT_DOUBLE_EQ(ball_volume_constant(1), 2.0);
  EXPECT_NEAR(ball_volume_constant(2), std::numbers::pi, 1e-14);
  EXPECT_NEAR(ball_volume_constant(3), 4.0 * std::numbers::pi / 3.0, 1e-14);
}

TEST(LocalTime, SlopeTwoPathHasDensityHalf) {
  const auto v = sampled(64, twice);
  const PathView p(TimeGrid(0.0, 1.0, 64), 1, v);
  const double x[1] = {0.8};
  EXPECT_NEAR(local_time_ball(p, 0.0, 1.0, x, 0.05), 0.5, 1e-14);
}

TEST(LocalTime, FieldOfLinearPath) {
  const auto v = sampled(100, identity);
  const PathView p(TimeGrid(0.0, 1.0, 100), 1, v);
  const double eps = 0.02;
  const auto tg = strided_t_grid(p, 0.1, 10);
  const auto xg = covering_x_grid(p, 0.1, 1.0, eps, eps / 2);
  for (auto kernel : {LocalTimeKernel::indicator, LocalTimeKernel::epanechnikov}) {
    const auto f = local_time_field(p, 0.1, tg, xg, eps, kernel);
    ASSERT_EQ(f.n_t(), tg.size());
    // Interior of the visited range: density 1.
    const std::size_t last = f.n_t() - 1;
    for (std::size_t j = 0; j < f.n_x(); ++j)
      if (f.x_grid[j] > 0.1 + eps && f.x_grid[j] < 1.0 - eps) EXPECT_NEAR(f.at(last, j), 1.0, 1e-12);
      else if (f.x_grid[j] < 0.1 - eps || f.x_grid[j] > 1.0 + eps) EXPECT_EQ(f.at(last, j), 0.0);
    for (double e : occupation_identity_errors(f)) EXPECT_LT(e, 1e-12);
  }
}

TEST(LocalTime, FieldMatchesPointwiseBall) {
  const auto b = sample_fbm(HurstParameter(0.3), TimeGrid(0.0, 1.0, 2048), 1, 12);
  const PathView p(b);
  const double eps = default_epsilon(p.grid.step(), 0.3);
  const auto tg = strided_t_grid(p, 0.1, 64);
  const auto xg = covering_x_grid(p, 0.1, 1.0, eps, eps / 4);
  const auto f = local_time_field(p, 0.1, tg, xg, eps);
  for (std::size_t i = 1; i < f.n_t(); i += 5)
    for (std::size_t j = 0; j < f.n_x(); j += 3) {
      const double x[1] = {f.x_grid[j]};
      EXPECT_NEAR(f.at(i, j), local_time_ball(p, 0.1, f.t_grid[i], x, eps), 1e-12);
    }
  const auto errs = occupation_identity_errors(f);
  EXPECT_LT(*std::max_element(errs.begin(), errs.end()), 1e-2);
}

TEST(LocalTime, FieldGuards) {
  const auto v = sampled(100, identity);
  const PathView p(TimeGrid(0.0, 1.0, 100), 1, v);
  const auto tg = strided_t_grid(p, 0.0, 10);
  const std::vector<double> coarse{0.0, 0.5, 1.0};
  EXPECT_THROW(local_time_field(p, 0.0, tg, coarse, 0.1), ResolutionError);
  const std::vector<double> late{0.5, 1.2};
  const auto xg = covering_x_grid(p, 0.0, 1.0, 0.1, 0.05);
  EXPECT_THROW(local_time_field(p, 0.0, late, xg, 0.1), OutOfRangeError);
  EXPECT_EQ(parse_kernel("epanechnikov"), LocalTimeKernel::epanechnikov);
  EXPECT_THROW(parse_kernel("box"), std::invalid_argument);
}

TEST(LocalTime, CoveringGridIsLatticeAndCovers) {
  const auto b = sample_fbm(HurstParameter(0.3), TimeGrid(0.0, 1.0, 512), 1, 2);
  const PathView p(b);
  const auto c = b.component(0);
  const double lo = *std::min_element(c.begin(), c.end());
  const double hi = *std::max_element(c.begin(), c.end());
  const auto xg = covering_x_grid(p, 0.0, 1.0, 0.1, 0.025);
  EXPECT_LE(xg.front(), lo - 0.1);
  EXPECT_GE(xg.back(), hi + 0.1);
  for (double x : xg) EXPECT_NEAR(x / 0.025, std::round(x / 0.025), 1e-9);
}

// Brownian case: E L(1, 0) = sqrt(2 / pi), Var = 1 - 2 / pi.
TEST(LocalTime, BrownianMeanAtOrigin) {
  const std::size_t n_paths = 2000;
  const FbmSampler s(HurstParameter(0.5), TimeGrid(0.0, 1.0, 4096));
  std::vector<double> l;
  for (std::size_t r = 0; r < n_paths; ++r) {
    const auto b = s.sample(1, 31, r);
    const double x[1] = {0.0};
    l.push_back(local_time_ball(PathView(b), 0.0, 1.0, x, 0.02));
  }
  const double se = std::sqrt(1.0 - 2.0 / std::numbers::pi) / std::sqrt(static_cast<double>(n_paths));
  EXPECT_NEAR(mean(l), std::sqrt(2.0 / std::numbers::pi), 4.0 * se + 0.005);
}

TEST(EpsilonStudy, ConstantPathIsAtomic) {
  const std::vector<double> v(33, 0.25);
  const PathView p(TimeGrid(0.0, 1.0, 32), 1, v);
  const std::vector<double> xg{0.0, 0.125, 0.25, 0.375, 0.5};
  const std::vector<double> ladder{0.4, 0.2, 0.1};
  const auto st = epsilon_convergence_study(p, 0.0, 1.0, xg, ladder);
  EXPECT_TRUE(st.degenerate_atomic);
  ASSERT_EQ(st.rungs.size(), 3u);
  EXPECT_NEAR(st.rungs[2].snapshot[2], 1.0 / 0.2, 1e-12);  // 1 / (2 eps) at the atom
  const std::vector<double> bad{0.1, 0.2};
  EXPECT_THROW(epsilon_convergence_study(p, 0.0, 1.0, xg, bad), std::invalid_argument);
}

TEST(EpsilonStudy, SmoothPathStabilises) {
  const auto v = sampled(1000, identity);
  const PathView p(TimeGrid(0.0, 1.0, 1000), 1, v);
  const std::vector<double> xg{0.3, 0.4, 0.5};
  const std::vector<double> ladder{0.05, 0.025, 0.0125};
  const auto st = epsilon_convergence_study(p, 0.0, 1.0, xg, ladder);
  EXPECT_FALSE(st.degenerate_atomic);
  for (std::size_t k = 1; k < 3; ++k) EXPECT_LT(st.rungs[k].sup_diff, 1e-12);
}
