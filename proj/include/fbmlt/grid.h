#pragma once

#include <cstddef>
#include <vector>

namespace fbmlt {

/// Hurst index, validated to lie in (0, 1).
class HurstParameter {
 public:
  explicit HurstParameter(double h);
  double value() const noexcept { return h_; }

  /// Local-time features need d*h < 1.
  bool admits_local_time(std::size_t dim) const noexcept;
  /// Time-regularity results need d = 1 and 1/4 < h < 1/2.
  bool admits_regularity(std::size_t dim) const noexcept;

 private:
  double h_;
};

/// Uniform grid t_start = t_0 < t_1 < ... < t_n = t_end.
class TimeGrid {
 public:
  TimeGrid(double t_start, double t_end, std::size_t n_steps);

  double t_start() const noexcept { return t_start_; }
  double t_end() const noexcept { return t_end_; }
  std::size_t n_steps() const noexcept { return n_steps_; }
  std::size_t n_points() const noexcept { return n_steps_ + 1; }
  double step() const noexcept { return (t_end_ - t_start_) / static_cast<double>(n_steps_); }

  /// Grid time k. The last point is returned as t_end exactly.
  double time(std::size_t k) const noexcept;
  std::vector<double> times() const;

  /// Index of the cell [t_k, t_{k+1}] containing t (clamped to the grid).
  std::size_t cell_of(double t) const noexcept;

  /// Coarsen by an integer factor; the result shares every factor-th point.
  TimeGrid coarsened(std::size_t factor) const;

  bool operator==(const TimeGrid&) const = default;

 private:
  double t_start_;
  double t_end_;
  std::size_t n_steps_;
};

} // namespace fbmlt
