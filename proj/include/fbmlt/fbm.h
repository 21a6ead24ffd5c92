#pragma once

#include "fbmlt/grid.h"

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

namespace fbmlt {

enum class FbmMethod { cholesky, davies_harte };

std::string_view to_string(FbmMethod m);
FbmMethod parse_fbm_method(std::string_view s);

/// R(s,t) = (s^{2h} + t^{2h} - |t-s|^{2h}) / 2. Throws std::domain_error on
/// negative times.
double fbm_covariance(double s, double t, HurstParameter h);

/// Autocovariance of unit-step fractional Gaussian noise at the given lag.
double fgn_autocovariance(std::size_t lag, double h);

/// A d-dimensional fBm trajectory on a uniform grid. values holds the d
/// components one after the other, each of length n_steps + 1, and every
/// component starts at 0. Values are B(t) - B(t_start).
struct FbmPath {
  TimeGrid grid;
  std::size_t dim = 1;
  std::vector<double> values;
  double hurst = 0.5;
  std::uint64_t seed = 0;
  std::uint64_t replication = 0;
  FbmMethod method = FbmMethod::davies_harte;

  std::span<const double> component(std::size_t i) const {
    return {values.data() + i * grid.n_points(), grid.n_points()};
  }
  std::span<double> component(std::size_t i) {
    return {values.data() + i * grid.n_points(), grid.n_points()};
  }
  double at(std::size_t i, std::size_t k) const { return values[i * grid.n_points() + k]; }
};

struct FbmSamplerOptions {
  /// Cholesky setup is O(n^3); larger requests raise ResourceError.
  std::size_t cholesky_cap = 4096;
  /// Circulant eigenvalues in (-tol, 0) are clipped to zero.
  double clip_tolerance = 1e-9;
};

/// Precomputes the factorization for one (h, grid, method) and then draws
/// independent paths cheaply. Immutable after construction and safe to share
/// between threads.
class FbmSampler {
 public:
  FbmSampler(HurstParameter h, TimeGrid grid, FbmMethod method = FbmMethod::davies_harte,
             FbmSamplerOptions options = {});
  ~FbmSampler();
  FbmSampler(FbmSampler&&) noexcept;
  FbmSampler& operator=(FbmSampler&&) noexcept;

  /// Replication r of seed; component i is drawn from derive_seed(derive_seed(seed, r), i).
  FbmPath sample(std::size_t dim, std::uint64_t seed, std::uint64_t replication = 0) const;

  /// n_steps fGn increments (already scaled to the grid step) from a
  /// single substream seed.
  void sample_increments(std::span<double> out, std::uint64_t stream_seed) const;

  const TimeGrid& grid() const noexcept { return grid_; }
  HurstParameter hurst() const noexcept { return h_; }
  FbmMethod method() const noexcept { return method_; }
  /// Number of circulant eigenvalues that were clipped to zero.
  std::size_t clipped_eigenvalues() const noexcept { return clipped_; }

 private:
  struct Fft;
  HurstParameter h_;
  TimeGrid grid_;
  FbmMethod method_;
  double scale_;                     // step^h
  std::vector<double> cholesky_;     // lower triangle, row-major n x n
  std::vector<double> sqrt_eigen_;   // sqrt(lambda_k / m), size m = 2n
  std::size_t clipped_ = 0;
  std::unique_ptr<Fft> fft_;
};

/// Convenience wrapper for a single path.
FbmPath sample_fbm(HurstParameter h, const TimeGrid& grid, std::size_t dim, std::uint64_t seed,
                   FbmMethod method = FbmMethod::davies_harte, std::uint64_t replication = 0);

/// Elementwise comparison of empirical and exact increment covariances.
/// Matrices are n x n row-major over increment indices of one component.
struct CovarianceCheckReport {
  std::size_t n_paths = 0;
  std::size_t n_increments = 0;
  std::vector<double> empirical;
  std::vector<double> exact;
  std::vector<double> z_scores;
  double max_abs_error = 0.0;
  double max_abs_z = 0.0;

  bool within(double z_max) const noexcept { return max_abs_z <= z_max; }
};

/// Streaming accumulator behind increment_covariance_check. Products are
/// taken about the known zero mean; the standard error of each entry comes
/// from the sample variance of the products.
class IncrementCovarianceAccumulator {
 public:
  IncrementCovarianceAccumulator(HurstParameter h, TimeGrid grid, std::size_t component = 0);

  void add(const FbmPath& path);
  void add_increments(std::span<const double> increments);
  /// Adds another accumulator's sums. Merging fixed blocks in a fixed order
  /// keeps the result independent of how the blocks were scheduled.
  void merge(const IncrementCovarianceAccumulator& other);
  CovarianceCheckReport report() const;
  std::size_t count() const noexcept { return count_; }

 private:
  HurstParameter h_;
  TimeGrid grid_;
  std::size_t component_;
  std::size_t count_ = 0;
  std::vector<double> sum_;     // upper triangle incl. diagonal, packed
  std::vector<double> sum_sq_;
};

/// Requires at least 100 paths on a common grid and Hurst index; otherwise
/// MismatchedGridError / std::invalid_argument.
CovarianceCheckReport increment_covariance_check(std::span<const FbmPath> paths,
                                                 std::size_t component = 0);

} // namespace fbmlt
