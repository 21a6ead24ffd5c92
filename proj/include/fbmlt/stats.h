#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace fbmlt {

/// Ordinary least squares y = intercept + slope * x.
struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double r_squared = 0.0;
  std::size_t n = 0;
};

LinearFit fit_line(std::span<const double> x, std::span<const double> y);

double mean(std::span<const double> v);
/// Sample standard deviation (n - 1 denominator).
double stddev(std::span<const double> v);
double median(std::span<const double> v);
/// Order statistic at index floor(p * (n - 1)); no interpolation.
double quantile_lower(std::span<const double> v, double p);

struct PooledEstimate {
  double median = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t n = 0;
};

/// Median with a percentile bootstrap interval. Deterministic in seed.
PooledEstimate pool_median(std::span<const double> values, double level = 0.95,
                           std::size_t n_boot = 2000, std::uint64_t seed = 0x5EEDULL);

} // namespace fbmlt
