#include "fbmlt/stats.h"
#include "fbmlt/rng.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace fbmlt {

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("fit_line: size mismatch");
  if (x.size() < 2) throw std::invalid_argument("fit_line: need at least two points");
  const auto n = x.size();
  const double mx = mean(x);
  const double my = mean(y);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx <= 0.0) throw std::invalid_argument("fit_line: x values are all equal");

  LinearFit f;
  f.n = n;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    sse += r * r;
  }
  f.slope_stderr = n > 2 ? std::sqrt(sse / static_cast<double>(n - 2) / sxx) : 0.0;
  f.r_squared = syy > 0.0 ? std::clamp(1.0 - sse / syy, 0.0, 1.0) : 1.0;
  return f;
}

double mean(std::span<const double> v) {
  if (v.empty()) throw std::invalid_argument("mean of empty range");
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double stddev(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double median(std::span<const double> v) {
  if (v.empty()) throw std::invalid_argument("median of empty range");
  std::vector<double> s(v.begin(), v.end());
  std::sort(s.begin(), s.end());
  const auto n = s.size();
  return n % 2 == 1 ? s[n / 2] : 0.5 * (s[n / 2 - 1] + s[n / 2]);
}

double quantile_lower(std::span<const double> v, double p) {
  if (v.empty()) throw std::invalid_argument("quantile of empty range");
  std::vector<double> s(v.begin(), v.end());
  const auto k = static_cast<std::size_t>(std::floor(p * static_cast<double>(s.size() - 1)));
  std::nth_element(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(k), s.end());
  return s[k];
}

PooledEstimate pool_median(std::span<const double> values, double level, std::size_t n_boot,
                           std::uint64_t seed) {
  if (values.empty()) throw std::invalid_argument("pool_median: no values");
  PooledEstimate out;
  out.n = values.size();
  out.median = median(values);

  NormalStream rng(seed);
  std::vector<double> boot(n_boot);
  std::vector<double> resample(values.size());
  for (auto& b : boot) {
    for (auto& r : resample) r = values[rng.index(values.size())];
    b = median(resample);
  }
  std::sort(boot.begin(), boot.end());
  const double tail = 0.5 * (1.0 - level);
  out.ci_low = boot[static_cast<std::size_t>(std::floor(tail * static_cast<double>(n_boot - 1)))];
  out.ci_high = boot[static_cast<std::size_t>(std::ceil((1.0 - tail) * static_cast<double>(n_boot - 1)))];
  return out;
}

} // namespace fbmlt
