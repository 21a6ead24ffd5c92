#pragma once

#include "fbmlt/simulate.h"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace fbmlt {

struct KdeEstimate {
  std::vector<double> x;        // odd-sized grid symmetric about the sample midrange
  std::vector<double> density;
  double bandwidth = 0.0;
  double integral = 0.0;        // trapezoid over x
  double sup() const;
};

/// 0.9 * min(sd, IQR / 1.34) * n^{-1/5}. The quartiles are order statistics
/// at indices floor(0.25 (n-1)) and ceil(0.75 (n-1)).
double silverman_bandwidth(std::span<const double> samples);

struct KdeOptions {
  /// Fixed bandwidth; when empty, bandwidth_scale * silverman_bandwidth.
  std::optional<double> bandwidth;
  double bandwidth_scale = 0.8;
  /// Number of grid points on each side of the centre.
  std::size_t half_points = 200;
  /// Grid extends this many bandwidths past the sample range.
  double pad = 4.0;
};

/// Gaussian-kernel density estimate on a grid. Needs at least 1000 samples;
/// zero spread raises DegenerateSampleError. Negating the samples mirrors
/// the estimate exactly.
KdeEstimate kde_increment_density(std::span<const double> samples, const KdeOptions& opt = {});

struct RunOptions {
  std::size_t n_paths = 1000;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
};

struct DensityScalingReport {
  std::vector<std::pair<double, double>> gaps;  // (s, u)
  std::vector<double> sup_density;
  std::vector<double> bandwidth;
  std::vector<double> kde_integral;
  double fitted_slope = 0.0;
  double theoretical_slope = 0.0;
  double slope_stderr = 0.0;
  double r_squared = 0.0;
  /// Same regression with the bandwidth halved and doubled.
  std::vector<double> sup_density_half_bw;
  std::vector<double> sup_density_double_bw;
  double slope_half_bw = 0.0;
  double slope_double_bw = 0.0;
  std::size_t n_paths = 0;
};

/// Increments X_u - X_s for s = time(s_index) and u = time(s_index + gap)
/// over every gap in gap_steps (grid steps). Needs d = 1, s > 0 and a gap
/// range of at least 1.5 decades.
DensityScalingReport sup_density_scaling(const PathSource& source, std::size_t s_index,
                                         std::span<const std::size_t> gap_steps, const RunOptions& run,
                                         const KdeOptions& kde = {});

/// The regression part of sup_density_scaling on increments already drawn:
/// increments[j] holds the samples for gap j, with u_times[j] its end time.
DensityScalingReport scaling_from_increments(double s, std::span<const double> u_times,
                                             const std::vector<std::vector<double>>& increments, double theoretical_slope,
                                             const KdeOptions& kde = {});

/// Increments X_u - X_s for each path, one vector per gap. Exposed for
/// reuse by tail checks and tests.
std::vector<std::vector<double>> sample_increments(const PathSimulator& sim, std::size_t s_index,
                                                   std::span<const std::size_t> gap_steps, const RunOptions& run);

struct TailReport {
  double gamma = 0.0;
  double gap = 0.0;
  std::vector<double> thresholds;  // thresholds actually used in the fit
  std::vector<double> survival;
  std::vector<double> log_survival;
  double fitted_tail_exponent = 0.0;
  double slope_stderr = 0.0;
  double median_abs = 0.0;
  std::size_t n_samples = 0;
};

/// Fits log(-log P(|Y| > r)) against log r over the thresholds that sit at
/// or above the median of |Y| and keep at least 50 exceedances.
/// Throws InsufficientTailSamples if every threshold lies below the median
/// or fewer than two thresholds survive.
TailReport tail_fit(std::span<const double> increments, std::span<const double> thresholds, double gamma);

/// 12 log-spaced thresholds from the median of |Y| to the level with 50
/// exceedances.
std::vector<double> auto_tail_thresholds(std::span<const double> increments, std::size_t count = 12);

/// gamma must lie in (0, h). Empty thresholds select auto_tail_thresholds.
TailReport tail_decay_check(const PathSource& source, double gamma, std::size_t s_index, std::size_t gap_steps,
                            std::span<const double> thresholds, const RunOptions& run);

struct ExistenceRow {
  double epsilon = 0.0;
  double value = 0.0;   // mean over paths of eps^{-d} * occupation of B(X_u, eps) over I
  double std_error = 0.0;
};

struct ExistenceReport {
  std::vector<ExistenceRow> rows;
  /// Mean and standard error over paths of the per-path OLS slope of the
  /// criterion value against log eps. Growth as eps shrinks shows up as a
  /// negative slope.
  double slope = 0.0;
  double slope_stderr = 0.0;
  bool bounded = false;  // |slope| <= 2 * slope_stderr
  std::size_t n_paths = 0;
  std::vector<std::vector<double>> per_path;  // [path][rung]
};

/// Per-path values of eps^{-d} * |{s in [i0, i1] : |X_s - X_u| <= eps}|.
std::vector<double> existence_values(const PathView& path, double u, double i0, double i1,
                                     std::span<const double> eps_ladder);

ExistenceReport existence_criterion_estimate(const PathSource& source, double u, double i0, double i1,
                                             std::span<const double> eps_ladder, const RunOptions& run);

struct ModulusRow {
  double distance = 0.0;
  double x = 0.0;
  double y = 0.0;
  double v_x = 0.0;
  double v_y = 0.0;
  double difference = 0.0;  // |v(x) - v(y)|
  double std_error = 0.0;     // Monte Carlo standard error of v(x) - v(y)
};

struct ModulusOptions {
  double a = 0.1;
  std::size_t pairs_per_path = 32;
  double bandwidth = 0.05;
};

/// v(x) = int int_{[a,T]^2} p_{s,u}(x, x) ds du estimated from (X_S, X_U)
/// with S, U uniform over the grid times in [a, T] and a product Gaussian
/// kernel. One row per y = x + distance.
std::vector<ModulusRow> smoothed_density_modulus(const PathSource& source, double x,
                                                 std::span<const double> distances, const RunOptions& run,
                                                 const ModulusOptions& opt = {});

/// First grid index with time >= a.
std::size_t first_index_at_or_after(const TimeGrid& grid, double a);

} // namespace fbmlt
