#include "fbmlt/grid.h"
#include "fbmlt/errors.h"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace fbmlt {

namespace {

std::string join_issues(const std::vector<std::string>& issues) {
  std::ostringstream os;
  os << "invalid configuration";
  for (const auto& i : issues) os << "\n  " << i;
  return os.str();
}

} // namespace

ConfigError::ConfigError(std::vector<std::string> issues)
    : std::invalid_argument(join_issues(issues)), issues_(std::move(issues)) {}

HurstParameter::HurstParameter(double h) : h_(h) {
  if (!(h > 0.0 && h < 1.0)) throw std::invalid_argument("Hurst parameter must lie in (0,1)");
}

bool HurstParameter::admits_local_time(std::size_t dim) const noexcept {
  return static_cast<double>(dim) * h_ < 1.0;
}

bool HurstParameter::admits_regularity(std::size_t dim) const noexcept {
  return dim == 1 && h_ > 0.25 && h_ < 0.5;
}

TimeGrid::TimeGrid(double t_start, double t_end, std::size_t n_steps)
    : t_start_(t_start), t_end_(t_end), n_steps_(n_steps) {
  if (!std::isfinite(t_start) || !std::isfinite(t_end)) throw std::invalid_argument("grid bounds must be finite");
  if (t_start < 0.0) throw std::invalid_argument("grid must start at t >= 0");
  if (!(t_end > t_start)) throw std::invalid_argument("grid requires t_end > t_start");
  if (n_steps == 0) throw std::invalid_argument("grid requires at least one step");
}

double TimeGrid::time(std::size_t k) const noexcept {
  if (k >= n_steps_) return t_end_;
  return t_start_ + static_cast<double>(k) * step();
}

std::vector<double> TimeGrid::times() const {
  std::vector<double> out(n_points());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = time(k);
  return out;
}

std::size_t TimeGrid::cell_of(double t) const noexcept {
  if (t <= t_start_) return 0;
  const double rel = (t - t_start_) / step();
  auto k = static_cast<std::size_t>(std::floor(rel));
  k = std::min(k, n_steps_ - 1);
  // floor() can land one cell off when t sits on a grid point up to rounding
  while (k > 0 && time(k) > t) --k;
  while (k + 1 < n_steps_ && time(k + 1) <= t) ++k;
  return k;
}

TimeGrid TimeGrid::coarsened(std::size_t factor) const {
  if (factor == 0 || n_steps_ % factor != 0)
    throw std::invalid_argument("coarsening factor must divide n_steps");
  return TimeGrid(t_start_, t_end_, n_steps_ / factor);
}

} // namespace fbmlt
