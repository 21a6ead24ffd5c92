#include "fbmlt/errors.h"
#include "fbmlt/fbm.h"
#include "fbmlt/scale_map.h"
#include "fbmlt/sde.h"
#include "fbmlt/simulate.h"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

using namespace fbmlt;

namespace {

// Antiderivative of 1 / (2 + sin u), valid on (-pi, pi).
double two_plus_sin_scale(double x) {
  const double r3 = std::sqrt(3.0);
  return 2.0 / r3 * (std::atan((2.0 * std::tan(0.5 * x) + 1.0) / r3) - std::atan(1.0 / r3));
}

// V(x) = x^2 in d = 1, no lower bound.
VectorFieldSet square_field() {
  VectorFieldSet vf;
  vf.id = "square";
  vf.dim = 1;
  vf.drift = zero_field();
  VectorField f;
  f.value = [](std::span<const double> x, std::span<double> out) { out[0] = x[0] * x[0]; };
  f.jacobian = [](std::span<const double> x, std::span<double> out) { out[0] = 2.0 * x[0]; };
  f.hessian = [](std::span<const double>, std::span<double> out) { out[0] = 2.0; };
  f.bound_value = f.bound_jacobian = f.bound_hessian = std::numeric_limits<double>::infinity();
  vf.diffusion.push_back(f);
  return vf;
}

double sup_error_vs_oracle(const VectorFieldSet& vf, const FbmPath& b, Scheme scheme, double x0) {
  const ScaleMap s(scalar_diffusion(vf), 1.0, 3.0);
  const double x0v[1] = {x0};
  const auto x = solve_sde(vf, x0v, b, scheme);
  double err = 0.0;
  for (std::size_t k = 0; k < b.grid.n_points(); ++k)
    err = std::max(err, std::abs(x.values[k] - s.solution(x0, b.values[k])));
  return err;
}

} // namespace

TEST(ScaleMap, MatchesClosedFormForTwoPlusSin) {
  const ScaleMap s([](double u) { return 2.0 + std::sin(u); }, 1.0, 3.0);
  for (double x : {-2.5, -1.0, -0.1, 0.0, 0.3, 1.7, 3.0}) EXPECT_NEAR(s(x), two_plus_sin_scale(x), 1e-13) << x;
  for (double y : {-1.2, -0.05, 0.4, 1.1}) EXPECT_NEAR(s(s.inverse(y)), y, 1e-13);
  EXPECT_NEAR(s.solution(0.5, 0.0), 0.5, 1e-13);
}

TEST(ScaleMap, LinearCoefficientIsAffine) {
  const ScaleMap s([](double) { return -2.0; }, 2.0, 2.0);
  EXPECT_NEAR(s(3.0), -1.5, 1e-14);
  EXPECT_NEAR(s.solution(1.0, 0.25), 0.5, 1e-14);
  EXPECT_THROW(ScaleMap([](double) { return 0.5; }, 1.0, 2.0), std::invalid_argument);
}

TEST(FieldSets, BuiltinsAndBounds) {
  const auto c = make_field_set("const_sigma", 2, 0.7);
  EXPECT_EQ(c.dim, 2u);
  EXPECT_TRUE(c.drift_free);
  double out[2];
  const double x[2] = {3.0, -1.0};
  c.eval_diffusion(1, x, out);
  EXPECT_EQ(out[0], 0.0);
  EXPECT_EQ(out[1], 0.7);

  const auto s = make_field_set("two_plus_sin", 1);
  EXPECT_EQ(s.diffusion[0].bound_below, 1.0);
  EXPECT_EQ(s.diffusion[0].bound_value, 3.0);
  const auto f = scalar_diffusion(s);
  EXPECT_NEAR(f(0.5), 2.0 + std::sin(0.5), 1e-15);

  const auto t = make_field_set("tanh_elliptic", 1);
  EXPECT_NEAR(scalar_diffusion(t)(100.0), 2.0, 1e-12);
  EXPECT_THROW(make_field_set("nope", 1), std::invalid_argument);
  EXPECT_THROW(make_field_set("const_sigma", 1, 0.0), std::invalid_argument);
}

TEST(FieldSets, EllipticityReport) {
  const std::vector<std::vector<double>> pts{{0.0, 0.0}, {1.0, -2.0}};
  const auto r = check_ellipticity(make_field_set("const_sigma", 2, 0.5), pts);
  EXPECT_TRUE(r.elliptic);
  EXPECT_NEAR(r.min_singular_value, 0.5, 1e-14);

  VectorFieldSet degenerate = make_field_set("const_sigma", 2);
  degenerate.diffusion[1] = degenerate.diffusion[0];
  EXPECT_FALSE(check_ellipticity(degenerate, pts).elliptic);
}

TEST(Schemes, ConstantFieldGivesShiftedDriverExactly) {
  const auto b = sample_fbm(HurstParameter(0.3), TimeGrid(0.0, 1.0, 256), 2, 9);
  const auto vf = make_field_set("const_sigma", 2, 1.5);
  const double x0[2] = {1.0, -2.0};
  for (auto scheme : {Scheme::euler, Scheme::wong_zakai}) {
    const auto x = solve_sde(vf, x0, b, scheme);
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t k = 0; k <= 256; k += 17) EXPECT_NEAR(x.at(i, k), x0[i] + 1.5 * b.at(i, k), 1e-12);
  }
  EXPECT_THROW(solve_sde(vf, x0, b, Scheme::milstein_1d), DimensionMismatch);
}

TEST(Schemes, WongZakaiMatchesScaleMapOracle) {
  const auto vf = make_field_set("two_plus_sin", 1);
  const auto b = sample_fbm(HurstParameter(0.4), TimeGrid(0.0, 1.0, 2048), 1, 21);
  EXPECT_LT(sup_error_vs_oracle(vf, b, Scheme::wong_zakai, 0.3), 1e-7);
}

TEST(Schemes, MilsteinConvergesInBrownianCase) {
  const auto vf = make_field_set("two_plus_sin", 1);
  const auto fine = sample_fbm(HurstParameter(0.5), TimeGrid(0.0, 1.0, 16384), 1, 4);
  std::vector<double> errs;
  for (std::size_t n : {256u, 4096u}) {
    const std::size_t stride = 16384 / n;
    FbmPath b = fine;
    b.grid = TimeGrid(0.0, 1.0, n);
    b.values.clear();
    for (std::size_t k = 0; k <= n; ++k) b.values.push_back(fine.values[k * stride]);
    errs.push_back(sup_error_vs_oracle(vf, b, Scheme::milstein_1d, 0.0));
  }
  EXPECT_LT(errs[1], errs[0]);
  EXPECT_LT(errs[1], 0.05);
}

TEST(Schemes, EulerConvergesForSmoothDriver) {
  // h = 0.75: Young regime, first-order scheme is consistent.
  const auto vf = make_field_set("two_plus_sin", 1);
  const auto b = sample_fbm(HurstParameter(0.75), TimeGrid(0.0, 1.0, 8192), 1, 8);
  EXPECT_LT(sup_error_vs_oracle(vf, b, Scheme::euler, 0.0), 0.02);
}

TEST(Schemes, BlowUpReportsStep) {
  const auto vf = square_field();
  const std::size_t n = 1000;
  std::vector<double> drv(n + 1);
  for (std::size_t k = 0; k <= n; ++k) drv[k] = 0.1 * static_cast<double>(k);
  const double x0[1] = {1.0};
  try {
    solve_sde(vf, x0, PathView(TimeGrid(0.0, 1.0, n), 1, drv), Scheme::euler);
    FAIL() << "expected BlowUpError";
  } catch (const BlowUpError& e) {
    EXPECT_GT(e.step(), 0u);
    EXPECT_LE(e.step(), n);
  }
}

TEST(Schemes, RejectsWrongDimensions) {
  const auto vf = make_field_set("const_sigma", 2);
  const auto b = sample_fbm(HurstParameter(0.3), TimeGrid(0.0, 1.0, 16), 1, 1);
  const double x0[2] = {0.0, 0.0};
  EXPECT_THROW(solve_sde(vf, x0, b, Scheme::euler), DimensionMismatch);
  EXPECT_EQ(parse_scheme("wong_zakai"), Scheme::wong_zakai);
  EXPECT_THROW(parse_scheme("heun"), std::invalid_argument);
}

TEST(Convergence, StudyUsesOracleAndDecreases) {
  const auto vf = make_field_set("two_plus_sin", 1);
  ConvergenceOptions opt;
  opt.n_paths = 3;
  const auto t = convergence_study(vf, 0.0, HurstParameter(0.4), Scheme::wong_zakai, {256, 1024, 4096}, opt);
  ASSERT_EQ(t.rows.size(), 3u);
  EXPECT_GT(t.rows[0].sup_error, t.rows[2].sup_error);
  EXPECT_GT(t.fitted_order, 0.0);
  EXPECT_EQ(t.per_path_errors.size(), 3u);
}

TEST(Convergence, OracleUnavailableCases) {
  EXPECT_THROW(convergence_study(make_field_set("const_sigma", 2), 0.0, HurstParameter(0.4), Scheme::euler, {64}),
               OracleUnavailable);
  auto drifted = make_field_set("two_plus_sin", 1);
  drifted.drift_free = false;
  EXPECT_THROW(convergence_study(drifted, 0.0, HurstParameter(0.4), Scheme::euler, {64}), OracleUnavailable);
  EXPECT_THROW(convergence_study(square_field(), 0.0, HurstParameter(0.4), Scheme::euler, {64}), OracleUnavailable);
  EXPECT_THROW(convergence_study(make_field_set("two_plus_sin", 1), 0.0, HurstParameter(0.4), Scheme::euler, {64, 96}),
               std::invalid_argument);
}

TEST(Simulator, LinearDriverAndDeterminism) {
  PathSource src;
  src.fields = make_field_set("const_sigma", 1, 2.0);
  src.x0 = {1.0};
  src.grid = TimeGrid(0.0, 1.0, 8);
  src.driver = DriverKind::linear;
  const PathSimulator sim(src);
  const auto x = sim.simulate(1, 0);
  for (std::size_t k = 0; k <= 8; ++k) EXPECT_NEAR(x.values[k], 1.0 + 2.0 * k / 8.0, 1e-14);

  src.driver = DriverKind::fbm;
  const PathSimulator fsim(src);
  EXPECT_EQ(fsim.simulate(3, 2).values, fsim.simulate(3, 2).values);
  EXPECT_NE(fsim.simulate(3, 2).values, fsim.simulate(3, 1).values);
  src.x0 = {0.0, 0.0};
  EXPECT_THROW(PathSimulator{src}, DimensionMismatch);
}
