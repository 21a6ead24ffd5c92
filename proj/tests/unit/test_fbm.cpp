#include "fbmlt/errors.h"
#include "fbmlt/fbm.h"
#include "fbmlt/stats.h"

#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

using namespace fbmlt;

namespace {

// Independent reference: R(s,t) straight from the definition.
double ref_cov(double s, double t, double h) {
  return 0.5 * (std::pow(s, 2 * h) + std::pow(t, 2 * h) - std::pow(std::abs(t - s), 2 * h));
}

} // namespace

TEST(FbmCovariance, BrownianCaseIsMin) {
  for (double s : {0.0, 0.2, 0.7})
    for (double t : {0.1, 0.5, 1.3}) EXPECT_NEAR(fbm_covariance(s, t, HurstParameter(0.5)), std::min(s, t), 1e-15);
}

TEST(FbmCovariance, MatchesDefinitionAndIsSymmetric) {
  for (double h : {0.1, 0.3, 0.75, 0.95}) {
    EXPECT_NEAR(fbm_covariance(0.3, 0.8, HurstParameter(h)), ref_cov(0.3, 0.8, h), 1e-15);
    EXPECT_EQ(fbm_covariance(0.3, 0.8, HurstParameter(h)), fbm_covariance(0.8, 0.3, HurstParameter(h)));
    EXPECT_NEAR(fbm_covariance(1.0, 1.0, HurstParameter(h)), 1.0, 1e-15);
  }
  EXPECT_THROW(fbm_covariance(-0.1, 0.5, HurstParameter(0.3)), std::domain_error);
}

TEST(FbmCovariance, FgnAutocovariance) {
  EXPECT_NEAR(fgn_autocovariance(0, 0.3), 1.0, 1e-15);
  EXPECT_NEAR(fgn_autocovariance(3, 0.5), 0.0, 1e-15);
  // Increments of R over unit cells.
  const double h = 0.7;
  for (std::size_t k = 1; k < 5; ++k) {
    const double kk = static_cast<double>(k);
    const double ref = ref_cov(kk + 1, 1, h) - ref_cov(kk, 1, h) - ref_cov(kk + 1, 0, h) + ref_cov(kk, 0, h);
    EXPECT_NEAR(fgn_autocovariance(k, h), ref, 1e-13);
  }
  EXPECT_LT(fgn_autocovariance(1, 0.3), 0.0);
  EXPECT_GT(fgn_autocovariance(1, 0.7), 0.0);
}

TEST(FbmSampler, StartsAtZeroAndIsDeterministic) {
  const TimeGrid g(0.0, 1.0, 64);
  for (auto m : {FbmMethod::davies_harte, FbmMethod::cholesky}) {
    const FbmSampler s(HurstParameter(0.3), g, m);
    const auto a = s.sample(2, 11, 3);
    const auto b = s.sample(2, 11, 3);
    EXPECT_EQ(a.values, b.values);
    EXPECT_EQ(a.at(0, 0), 0.0);
    EXPECT_EQ(a.at(1, 0), 0.0);
    EXPECT_NE(a.component(0)[10], a.component(1)[10]);
    const auto c = s.sample(2, 11, 4);
    EXPECT_NE(a.values, c.values);
  }
}

TEST(FbmSampler, CholeskyCapRaises) {
  FbmSamplerOptions opt;
  opt.cholesky_cap = 100;
  EXPECT_THROW(FbmSampler(HurstParameter(0.3), TimeGrid(0.0, 1.0, 101), FbmMethod::cholesky, opt), ResourceError);
}

TEST(FbmSampler, ParsesMethodNames) {
  EXPECT_EQ(parse_fbm_method("davies_harte"), FbmMethod::davies_harte);
  EXPECT_EQ(parse_fbm_method("cholesky"), FbmMethod::cholesky);
  EXPECT_THROW(parse_fbm_method("hosking"), std::invalid_argument);
}

// Both methods must reproduce the exact covariance; compared entrywise with
// the definition of R via the increment accumulator.
class FbmExactness : public ::testing::TestWithParam<std::tuple<double, FbmMethod>> {};

TEST_P(FbmExactness, IncrementCovarianceWithinFiveSe) {
  const auto [h, method] = GetParam();
  const TimeGrid g(0.0, 1.0, 32);
  const FbmSampler s(HurstParameter(h), g, method);
  std::vector<FbmPath> paths;
  for (std::size_t r = 0; r < 4000; ++r) paths.push_back(s.sample(1, 77, r));
  const auto rep = increment_covariance_check(paths);
  EXPECT_TRUE(rep.within(5.0)) << "max |z| " << rep.max_abs_z;
  const double dt = g.step();
  for (std::size_t i = 0; i < 32; i += 7)
    for (std::size_t j = i; j < 32; j += 5) {
      const double ti = i * dt, tj = j * dt;
      const double ref = ref_cov(ti + dt, tj + dt, h) - ref_cov(ti + dt, tj, h) - ref_cov(ti, tj + dt, h) +
                         ref_cov(ti, tj, h);
      EXPECT_NEAR(rep.exact[i * 32 + j], ref, 1e-12);
    }
}

INSTANTIATE_TEST_SUITE_P(Methods, FbmExactness,
                         ::testing::Combine(::testing::Values(0.3, 0.5, 0.75),
                                            ::testing::Values(FbmMethod::davies_harte, FbmMethod::cholesky)));

TEST(FbmSampler, EndpointVarianceScalesWithT) {
  const double h = 0.3;
  const FbmSampler s(HurstParameter(h), TimeGrid(0.0, 4.0, 128));
  std::vector<double> end;
  for (std::size_t r = 0; r < 20000; ++r) end.push_back(s.sample(1, 5, r).at(0, 128));
  const double var = std::pow(stddev(end), 2);
  const double exact = std::pow(4.0, 2 * h);
  EXPECT_NEAR(var, exact, 5.0 * exact * std::sqrt(2.0 / 20000.0));
}

TEST(Accumulator, MergeEqualsSequential) {
  const TimeGrid g(0.0, 1.0, 16);
  const HurstParameter h(0.4);
  const FbmSampler s(h, g);
  IncrementCovarianceAccumulator all(h, g), a(h, g), b(h, g);
  for (std::size_t r = 0; r < 200; ++r) {
    const auto p = s.sample(1, 3, r);
    all.add(p);
    (r < 100 ? a : b).add(p);
  }
  a.merge(b);
  EXPECT_EQ(a.count(), 200u);
  const auto ra = a.report(), rall = all.report();
  for (std::size_t i = 0; i < ra.empirical.size(); ++i) EXPECT_NEAR(ra.empirical[i], rall.empirical[i], 1e-12);
  IncrementCovarianceAccumulator other(HurstParameter(0.3), g);
  EXPECT_THROW(a.merge(other), MismatchedGridError);
}

TEST(Accumulator, RejectsMismatchedPaths) {
  const TimeGrid g(0.0, 1.0, 16);
  IncrementCovarianceAccumulator acc(HurstParameter(0.4), g);
  EXPECT_THROW(acc.add(sample_fbm(HurstParameter(0.4), TimeGrid(0.0, 1.0, 8), 1, 1)), MismatchedGridError);
  EXPECT_THROW(acc.report(), std::invalid_argument);
  std::vector<FbmPath> few{sample_fbm(HurstParameter(0.4), g, 1, 1)};
  EXPECT_THROW(increment_covariance_check(few), std::invalid_argument);
}
