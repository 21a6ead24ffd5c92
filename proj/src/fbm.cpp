#include "fbmlt/fbm.h"
#include "fbmlt/errors.h"
#include "fbmlt/rng.h"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <fftw3.h>

#include <cmath>
#include <iostream>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <string>

namespace fbmlt {

namespace {

// FFTW planning is not thread-safe; execution on an existing plan is.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const noexcept { fftw_free(p); }
};
using ComplexBuffer = std::unique_ptr<fftw_complex[], FftwFree>;

ComplexBuffer make_buffer(std::size_t m) {
  auto* p = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * m));
  if (!p) throw std::bad_alloc();
  return ComplexBuffer(p);
}

std::size_t packed_index(std::size_t i, std::size_t j, std::size_t n) {
  // row i of the upper triangle starts after rows 0..i-1
  return i * n - i * (i - 1) / 2 + (j - i);
}

} // namespace

std::string_view to_string(FbmMethod m) {
  return m == FbmMethod::cholesky ? "cholesky" : "davies_harte";
}

FbmMethod parse_fbm_method(std::string_view s) {
  if (s == "cholesky") return FbmMethod::cholesky;
  if (s == "davies_harte") return FbmMethod::davies_harte;
  throw std::invalid_argument("unknown fbm method: " + std::string(s));
}

double fbm_covariance(double s, double t, HurstParameter h) {
  if (s < 0.0 || t < 0.0) throw std::domain_error("fbm_covariance: times must be nonnegative");
  const double two_h = 2.0 * h.value();
  return 0.5 * (std::pow(s, two_h) + std::pow(t, two_h) - std::pow(std::abs(t - s), two_h));
}

double fgn_autocovariance(std::size_t lag, double h) {
  const double k = static_cast<double>(lag);
  const double two_h = 2.0 * h;
  if (lag == 0) return 1.0;
  return 0.5 * (std::pow(k + 1.0, two_h) - 2.0 * std::pow(k, two_h) + std::pow(k - 1.0, two_h));
}

struct FbmSampler::Fft {
  fftw_plan plan = nullptr;
  std::size_t m = 0;

  explicit Fft(std::size_t size) : m(size) {
    auto in = make_buffer(m);
    auto out = make_buffer(m);
    std::lock_guard lock(fftw_planner_mutex());
    plan = fftw_plan_dft_1d(static_cast<int>(m), in.get(), out.get(), FFTW_FORWARD, FFTW_ESTIMATE);
    if (!plan) throw std::runtime_error("FFTW planning failed");
  }
  ~Fft() {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;

  void forward(fftw_complex* in, fftw_complex* out) const { fftw_execute_dft(plan, in, out); }
};

FbmSampler::FbmSampler(HurstParameter h, TimeGrid grid, FbmMethod method, FbmSamplerOptions options)
    : h_(h), grid_(grid), method_(method), scale_(std::pow(grid.step(), h.value())) {
  const std::size_t n = grid_.n_steps();

  if (method_ == FbmMethod::cholesky) {
    if (n > options.cholesky_cap)
      throw ResourceError("cholesky sampling requested for " + std::to_string(n) +
                          " steps; cap is " + std::to_string(options.cholesky_cap));
    Eigen::MatrixXd cov(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        cov(i, j) = fgn_autocovariance(i > j ? i - j : j - i, h_.value());
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) throw std::runtime_error("fGn covariance is not positive definite");
    const Eigen::MatrixXd lower = llt.matrixL();
    cholesky_.resize(n * n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) cholesky_[i * n + j] = lower(i, j);
    return;
  }

  const std::size_t m = 2 * n;
  fft_ = std::make_unique<Fft>(m);
  auto row = make_buffer(m);
  auto eig = make_buffer(m);
  for (std::size_t j = 0; j < m; ++j) {
    const std::size_t lag = j <= n ? j : m - j;
    row[j][0] = fgn_autocovariance(lag, h_.value());
    row[j][1] = 0.0;
  }
  fft_->forward(row.get(), eig.get());

  sqrt_eigen_.resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    double lambda = eig[k][0];
    if (lambda < 0.0) {
      if (lambda < -options.clip_tolerance)
        throw EmbeddingError("circulant embedding eigenvalue " + std::to_string(lambda) + " at index " +
                             std::to_string(k) + " is below -" + std::to_string(options.clip_tolerance));
      lambda = 0.0;
      ++clipped_;
    }
    sqrt_eigen_[k] = std::sqrt(lambda / static_cast<double>(m));
  }
  if (clipped_ > 0)
    std::clog << "fbmlt: clipped " << clipped_ << " slightly negative circulant eigenvalue(s) to zero\n";
}

FbmSampler::~FbmSampler() = default;
FbmSampler::FbmSampler(FbmSampler&&) noexcept = default;
FbmSampler& FbmSampler::operator=(FbmSampler&&) noexcept = default;

void FbmSampler::sample_increments(std::span<double> out, std::uint64_t stream_seed) const {
  const std::size_t n = grid_.n_steps();
  if (out.size() != n) throw DimensionMismatch("sample_increments: output must hold n_steps values");
  NormalStream normal(stream_seed);

  if (method_ == FbmMethod::cholesky) {
    std::vector<double> z(n);
    normal.fill(z);
    for (std::size_t i = 0; i < n; ++i) {
      const double* row = cholesky_.data() + i * n;
      double acc = 0.0;
      for (std::size_t j = 0; j <= i; ++j) acc += row[j] * z[j];
      out[i] = scale_ * acc;
    }
    return;
  }

  const std::size_t m = sqrt_eigen_.size();
  auto w = make_buffer(m);
  auto y = make_buffer(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double re = normal();
    const double im = normal();
    w[k][0] = sqrt_eigen_[k] * re;
    w[k][1] = sqrt_eigen_[k] * im;
  }
  fft_->forward(w.get(), y.get());
  for (std::size_t j = 0; j < n; ++j) out[j] = scale_ * y[j][0];
}

FbmPath FbmSampler::sample(std::size_t dim, std::uint64_t seed, std::uint64_t replication) const {
  if (dim == 0) throw std::invalid_argument("fBm dimension must be at least 1");
  FbmPath path{grid_, dim, std::vector<double>(dim * grid_.n_points()), h_.value(), seed, replication, method_};
  const std::uint64_t path_seed = derive_seed(seed, replication);
  std::vector<double> inc(grid_.n_steps());
  for (std::size_t i = 0; i < dim; ++i) {
    sample_increments(inc, derive_seed(path_seed, i));
    auto comp = path.component(i);
    comp[0] = 0.0;
    for (std::size_t k = 0; k < inc.size(); ++k) comp[k + 1] = comp[k] + inc[k];
  }
  return path;
}

FbmPath sample_fbm(HurstParameter h, const TimeGrid& grid, std::size_t dim, std::uint64_t seed,
                   FbmMethod method, std::uint64_t replication) {
  return FbmSampler(h, grid, method).sample(dim, seed, replication);
}

IncrementCovarianceAccumulator::IncrementCovarianceAccumulator(HurstParameter h, TimeGrid grid,
                                                               std::size_t component)
    : h_(h), grid_(grid), component_(component) {
  const std::size_t n = grid_.n_steps();
  sum_.assign(n * (n + 1) / 2, 0.0);
  sum_sq_.assign(n * (n + 1) / 2, 0.0);
}

void IncrementCovarianceAccumulator::add(const FbmPath& path) {
  if (!(path.grid == grid_) || path.hurst != h_.value())
    throw MismatchedGridError("path grid or Hurst index differs from the accumulator's");
  if (component_ >= path.dim) throw DimensionMismatch("component index out of range");
  auto comp = path.component(component_);
  std::vector<double> inc(grid_.n_steps());
  for (std::size_t k = 0; k < inc.size(); ++k) inc[k] = comp[k + 1] - comp[k];
  add_increments(inc);
}

void IncrementCovarianceAccumulator::add_increments(std::span<const double> inc) {
  const std::size_t n = grid_.n_steps();
  if (inc.size() != n) throw DimensionMismatch("increment vector has wrong length");
  std::size_t idx = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = inc[i];
    for (std::size_t j = i; j < n; ++j, ++idx) {
      const double p = xi * inc[j];
      sum_[idx] += p;
      sum_sq_[idx] += p * p;
    }
  }
  ++count_;
}

void IncrementCovarianceAccumulator::merge(const IncrementCovarianceAccumulator& other) {
  if (!(other.grid_ == grid_) || other.h_.value() != h_.value() || other.component_ != component_)
    throw MismatchedGridError("accumulators differ in grid, Hurst index or component");
  for (std::size_t i = 0; i < sum_.size(); ++i) {
    sum_[i] += other.sum_[i];
    sum_sq_[i] += other.sum_sq_[i];
  }
  count_ += other.count_;
}

CovarianceCheckReport IncrementCovarianceAccumulator::report() const {
  const std::size_t n = grid_.n_steps();
  CovarianceCheckReport r;
  r.n_paths = count_;
  r.n_increments = n;
  r.empirical.assign(n * n, 0.0);
  r.exact.assign(n * n, 0.0);
  r.z_scores.assign(n * n, 0.0);
  if (count_ < 2) throw std::invalid_argument("covariance check needs at least two paths");

  const double N = static_cast<double>(count_);
  const double dt = grid_.step();
  auto u = [&](std::size_t k) { return static_cast<double>(k) * dt; };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const std::size_t p = packed_index(i, j, n);
      const double m = sum_[p] / N;
      const double var = std::max(0.0, (sum_sq_[p] - N * m * m) / (N - 1.0));
      const double se = std::sqrt(var / N);
      const double exact = fbm_covariance(u(i + 1), u(j + 1), h_) - fbm_covariance(u(i + 1), u(j), h_) -
                           fbm_covariance(u(i), u(j + 1), h_) + fbm_covariance(u(i), u(j), h_);
      const double dev = m - exact;
      double z = 0.0;
      if (se > 0.0) z = dev / se;
      else if (dev != 0.0) z = std::copysign(std::numeric_limits<double>::infinity(), dev);
      for (auto [a, b] : {std::pair{i, j}, std::pair{j, i}}) {
        r.empirical[a * n + b] = m;
        r.exact[a * n + b] = exact;
        r.z_scores[a * n + b] = z;
      }
      r.max_abs_error = std::max(r.max_abs_error, std::abs(dev));
      r.max_abs_z = std::max(r.max_abs_z, std::abs(z));
    }
  }
  return r;
}

CovarianceCheckReport increment_covariance_check(std::span<const FbmPath> paths, std::size_t component) {
  if (paths.size() < 100) throw std::invalid_argument("increment_covariance_check needs at least 100 paths");
  IncrementCovarianceAccumulator acc(HurstParameter(paths.front().hurst), paths.front().grid, component);
  for (const auto& p : paths) acc.add(p);
  return acc.report();
}

} // namespace fbmlt
