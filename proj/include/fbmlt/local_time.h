#pragma once

#include "fbmlt/path.h"

#include <cstddef>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

namespace fbmlt {

/// Closed interval [lo, hi] in R; lo > hi is the empty set. Infinite
/// endpoints are allowed.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Closed Euclidean ball.
struct Ball {
  std::vector<double> center;
  double radius = 0.0;
};

using OccupationSet = std::variant<Interval, Ball>;

/// Volume of the unit ball in R^d: 2, pi, 4pi/3, ...
double ball_volume_constant(std::size_t dim);

/// Lebesgue measure of {s in [a,t] : X_s in A} for the piecewise-linear
/// interpolant of the sampled path. Interval sets need d = 1.
/// Throws OutOfRangeError unless t_start <= a <= t <= t_end.
double occupation_measure(const PathView& path, double a, double t, const OccupationSet& set);

/// occupation_measure(B(x, eps)) / (C_d eps^d).
double local_time_ball(const PathView& path, double a, double t, std::span<const double> x, double epsilon);

enum class LocalTimeKernel { indicator, epanechnikov };

std::string_view to_string(LocalTimeKernel k);
LocalTimeKernel parse_kernel(std::string_view s);

/// L^a(t, x) on a (t, x) grid, d = 1. values is row-major with one row per
/// t_grid entry.
struct LocalTimeField {
  double a = 0.0;
  std::vector<double> t_grid;
  std::vector<double> x_grid;
  double epsilon = 0.0;
  double ball_constant = 2.0;
  LocalTimeKernel kernel = LocalTimeKernel::indicator;
  std::vector<double> values;

  std::size_t n_t() const noexcept { return t_grid.size(); }
  std::size_t n_x() const noexcept { return x_grid.size(); }
  double at(std::size_t i, std::size_t j) const { return values[i * x_grid.size() + j]; }
  std::span<const double> row(std::size_t i) const { return {values.data() + i * x_grid.size(), x_grid.size()}; }
};

/// Built in one pass over the path cells. The x_grid must be increasing with
/// spacing <= epsilon (ResolutionError otherwise) and t_grid increasing
/// inside [a, t_end] (OutOfRangeError otherwise).
LocalTimeField local_time_field(const PathView& path, double a, std::span<const double> t_grid,
                                std::span<const double> x_grid, double epsilon,
                                LocalTimeKernel kernel = LocalTimeKernel::indicator);

/// 4 * step^h, the default ball radius tied to path resolution.
double default_epsilon(double step, double h);

/// Uniform x-grid with the given spacing whose nodes sit on integer
/// multiples of spacing and cover [min X - eps, max X + eps] over [a, t].
std::vector<double> covering_x_grid(const PathView& path, double a, double t, double epsilon, double spacing);

/// Uniform t_grid a + m * stride * step, m = 0, 1, ..., up to t_end.
std::vector<double> strided_t_grid(const PathView& path, double a, std::size_t stride);

/// |trapezoid(L(t,.)) - (t - a)| / (t - a) per t_grid row; 0 for t = a.
std::vector<double> occupation_identity_errors(const LocalTimeField& field);

struct EpsilonRung {
  double epsilon = 0.0;
  std::vector<double> snapshot;  // L_eps(t, x) on x_grid
  double sup_diff = 0.0;         // sup_x |L_eps - L_prev|, 0 on the first rung
  bool resolved = true;          // eps above the typical one-step displacement
};

struct EpsilonStudy {
  std::vector<double> x_grid;
  std::vector<EpsilonRung> rungs;
  /// One-step displacement scale (median |X_{k+1} - X_k|) below which the
  /// estimator stops resolving the path.
  double noise_floor = 0.0;
  /// Path is constant on [a, t]: the occupation measure is an atom and
  /// L_eps diverges like 1/eps at its location.
  bool degenerate_atomic = false;
};

/// eps_ladder must be strictly decreasing.
EpsilonStudy epsilon_convergence_study(const PathView& path, double a, double t, std::span<const double> x_grid,
                                       std::span<const double> eps_ladder);

} // namespace fbmlt
