#pragma once

#include "fbmlt/local_time.h"
#include "fbmlt/path.h"
#include "fbmlt/stats.h"

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace fbmlt {

enum class HolderMode { time_uniform_in_x, space, path };

std::string_view to_string(HolderMode m);

/// How the increments entering M(delta) are anchored.
///   fixed_windows: K anchors floor(k N / K), k = 0..K-1, at every lag, so
///                  each scale takes a max over the same number of draws
///   sliding:       every admissible anchor
enum class WindowPolicy { fixed_windows, sliding };

std::string_view to_string(WindowPolicy p);
WindowPolicy parse_window_policy(std::string_view s);

struct HolderOptions {
  WindowPolicy windows = WindowPolicy::fixed_windows;
  std::size_t n_windows = 8;
  /// Also use backward increments f(t) - f(t - delta) at each anchor.
  bool two_sided = false;
  /// Exponents at or above this are reported as resolution-capped.
  double cap = 0.95;
};

struct HolderEstimate {
  double exponent = 0.0;
  double slope_stderr = 0.0;
  double r_squared = 0.0;
  double delta_min = 0.0;
  double delta_max = 0.0;
  std::size_t n_scales = 0;
  HolderMode mode = HolderMode::path;
  std::vector<double> deltas;
  std::vector<double> maxima;
  bool resolution_capped = false;
};

/// Lags 8, 16, ... up to n_intervals / n_windows, in index units.
std::vector<std::size_t> dyadic_ladder(std::size_t n_intervals, std::size_t n_windows = 8,
                                       std::size_t smallest = 8);

/// Lags are in t_grid index units; the t_grid must be uniform.
HolderEstimate estimate_holder_time(const LocalTimeField& field, std::span<const std::size_t> lags,
                                    const HolderOptions& opt = {});
/// Lags are in x_grid index units; the x_grid must be uniform.
HolderEstimate estimate_holder_space(const LocalTimeField& field, std::span<const std::size_t> lags,
                                     const HolderOptions& opt = {});
/// Lags in path grid steps; component 0 unless stated.
HolderEstimate estimate_path_holder(const PathView& path, std::span<const std::size_t> lags,
                                    const HolderOptions& opt = {}, std::size_t component = 0);

struct LowerBoundRow {
  double delta = 0.0;
  double sup_increment = 0.0;  // sup_x L(t+delta, x) - L(t, x)
  double oscillation = 0.0;    // max - min of X on [t, t+delta]
  double rhs = 0.0;            // 2 * sup_increment * oscillation
  double ratio = 0.0;          // delta / rhs
  bool holds = false;          // delta <= rhs * (1 + tol)
  double integral = 0.0;       // trapezoid of L(t+delta,.) - L(t,.)
  double integral_rel_error = 0.0;
};

/// Checks delta <= 2 sup_x |L(t+delta,x) - L(t,x)| osc(X; [t,t+delta]) for
/// each lag (in t_grid units) measured from t_grid index i0.
std::vector<LowerBoundRow> lower_bound_check(const PathView& path, const LocalTimeField& field, std::size_t i0,
                                             std::span<const std::size_t> lags, double tol = 0.05);

struct PooledHolder {
  PooledEstimate pooled;
  std::vector<double> exponents;
};

PooledHolder pool_exponents(std::span<const HolderEstimate> estimates, std::uint64_t seed = 0x5EEDULL);

} // namespace fbmlt
