#include "fbmlt/local_time.h"
#include "fbmlt/errors.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace fbmlt {

namespace {

void check_window(const PathView& path, double a, double t) {
  if (!(a >= path.grid.t_start() && t <= path.grid.t_end() && a <= t))
    throw OutOfRangeError("time window [" + std::to_string(a) + ", " + std::to_string(t) +
                          "] is not inside the path grid");
}

// Fraction of the parameter interval [0,1] on which u0 + w (u1 - u0) lies in [lo, hi].
double interval_fraction(double u0, double u1, double lo, double hi) {
  if (u0 == u1) return (lo <= u0 && u0 <= hi) ? 1.0 : 0.0;
  const double mn = std::min(u0, u1);
  const double mx = std::max(u0, u1);
  const double overlap = std::min(mx, hi) - std::max(mn, lo);
  return overlap > 0.0 ? overlap / (mx - mn) : 0.0;
}

// Mean of the Epanechnikov kernel (support [-eps, eps], unit mass) along the segment.
double epanechnikov_mean(double u0, double u1, double eps) {
  auto kern = [eps](double u) {
    const double r = u / eps;
    return std::abs(r) <= 1.0 ? 0.75 * (1.0 - r * r) / eps : 0.0;
  };
  auto anti = [eps](double u) {
    const double r = u / eps;
    return 0.75 * (r - r * r * r / 3.0);
  };
  if (u0 == u1) return kern(u0);
  const double mn = std::min(u0, u1);
  const double mx = std::max(u0, u1);
  const double lo = std::max(mn, -eps);
  const double hi = std::min(mx, eps);
  if (!(hi > lo)) return 0.0;
  return (anti(hi) - anti(lo)) / (mx - mn);
}

// Fraction of [0,1] on which p0 + w (p1 - p0) lies in the closed ball.
double ball_fraction(const PathView& path, std::size_t k, double w0, double w1, const Ball& ball) {
  const std::size_t d = path.dim;
  double qa = 0.0, qb = 0.0, qc = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double p0 = path.at(i, k) + w0 * (path.at(i, k + 1) - path.at(i, k));
    const double p1 = path.at(i, k) + w1 * (path.at(i, k + 1) - path.at(i, k));
    const double u = p0 - ball.center[i];
    const double du = p1 - p0;
    qa += du * du;
    qb += u * du;
    qc += u * u;
  }
  qc -= ball.radius * ball.radius;
  if (qa == 0.0) return qc <= 0.0 ? 1.0 : 0.0;
  const double disc = qb * qb - qa * qc;
  if (disc < 0.0) return 0.0;
  const double root = std::sqrt(disc);
  const double lo = std::max(0.0, (-qb - root) / qa);
  const double hi = std::min(1.0, (-qb + root) / qa);
  return hi > lo ? hi - lo : 0.0;
}

// Value of component i at fraction w of cell k. The endpoints are returned
// exactly so that full cells use the stored samples.
double cell_value(const PathView& path, std::size_t i, std::size_t k, double w) {
  if (w == 0.0) return path.at(i, k);
  if (w == 1.0) return path.at(i, k + 1);
  return path.at(i, k) + w * (path.at(i, k + 1) - path.at(i, k));
}

// Calls fn(k, w0, w1, duration) for each piece of [a, t] cut at grid times.
template <class Fn>
void for_each_piece(const PathView& path, double a, double t, Fn&& fn) {
  const TimeGrid& g = path.grid;
  const double step = g.step();
  double cur = a;
  while (cur < t) {
    const std::size_t k = g.cell_of(cur);
    const double t0 = g.time(k);
    const double t1 = g.time(k + 1);
    const double end = std::min(t, t1);
    const double w0 = cur == t0 ? 0.0 : std::clamp((cur - t0) / step, 0.0, 1.0);
    const double w1 = end == t1 ? 1.0 : std::clamp((end - t0) / step, 0.0, 1.0);
    fn(k, w0, w1, end - cur);
    if (end <= cur) break;
    cur = end;
  }
}

std::vector<double> require_increasing(std::span<const double> v, const char* what) {
  if (v.empty()) throw std::invalid_argument(std::string(what) + " is empty");
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] > v[i - 1])) throw std::invalid_argument(std::string(what) + " must be strictly increasing");
  return {v.begin(), v.end()};
}

LocalTimeField build_field(const PathView& path, double a, std::span<const double> t_grid,
                           std::span<const double> x_grid, double epsilon, LocalTimeKernel kernel,
                           bool check_resolution) {
  if (path.dim != 1) throw DimensionMismatch("local-time fields are one-dimensional");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  LocalTimeField field;
  field.a = a;
  field.t_grid = require_increasing(t_grid, "t_grid");
  field.x_grid = require_increasing(x_grid, "x_grid");
  field.epsilon = epsilon;
  field.ball_constant = 2.0;
  field.kernel = kernel;
  if (check_resolution) {
    for (std::size_t j = 1; j < x_grid.size(); ++j)
      if (x_grid[j] - x_grid[j - 1] > epsilon)
        throw ResolutionError("x_grid spacing " + std::to_string(x_grid[j] - x_grid[j - 1]) +
                              " exceeds epsilon " + std::to_string(epsilon));
  }
  if (t_grid.front() < a) throw OutOfRangeError("t_grid starts before a");
  check_window(path, a, t_grid.back());

  const std::size_t nx = x_grid.size();
  field.values.assign(t_grid.size() * nx, 0.0);
  std::vector<double> acc(nx, 0.0);
  const double norm = kernel == LocalTimeKernel::indicator ? 1.0 / (2.0 * epsilon) : 1.0;

  auto add_piece = [&](std::size_t k, double w0, double w1, double dur) {
    const double p0 = cell_value(path, 0, k, w0);
    const double p1 = cell_value(path, 0, k, w1);
    const double lo = std::min(p0, p1) - epsilon;
    const double hi = std::max(p0, p1) + epsilon;
    // one node of slack either side; nodes outside the ball contribute exactly 0
    auto first = std::lower_bound(x_grid.begin(), x_grid.end(), lo);
    auto last = std::upper_bound(x_grid.begin(), x_grid.end(), hi);
    std::size_t j0 = static_cast<std::size_t>(first - x_grid.begin());
    std::size_t j1 = static_cast<std::size_t>(last - x_grid.begin());
    j0 = j0 > 0 ? j0 - 1 : 0;
    j1 = std::min(nx, j1 + 1);
    for (std::size_t j = j0; j < j1; ++j) {
      const double u0 = p0 - x_grid[j];
      const double u1 = p1 - x_grid[j];
      const double w = kernel == LocalTimeKernel::indicator ? interval_fraction(u0, u1, -epsilon, epsilon)
                                                            : epanechnikov_mean(u0, u1, epsilon);
      acc[j] += dur * w;
    }
  };

  double cur = a;
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    for_each_piece(path, cur, t_grid[i], add_piece);
    cur = t_grid[i];
    double* row = field.values.data() + i * nx;
    for (std::size_t j = 0; j < nx; ++j) row[j] = acc[j] * norm;
  }
  return field;
}

} // namespace

double ball_volume_constant(std::size_t dim) {
  if (dim == 0) throw std::invalid_argument("dimension must be positive");
  if (dim == 1) return 2.0;
  if (dim == 2) return std::numbers::pi;
  const double half = 0.5 * static_cast<double>(dim);
  return std::pow(std::numbers::pi, half) / std::tgamma(half + 1.0);
}

double occupation_measure(const PathView& path, double a, double t, const OccupationSet& set) {
  check_window(path, a, t);
  double total = 0.0;
  if (const auto* iv = std::get_if<Interval>(&set)) {
    if (path.dim != 1) throw DimensionMismatch("interval sets need a one-dimensional path");
    if (iv->lo > iv->hi) return 0.0;
    for_each_piece(path, a, t, [&](std::size_t k, double w0, double w1, double dur) {
      total += dur * interval_fraction(cell_value(path, 0, k, w0), cell_value(path, 0, k, w1), iv->lo, iv->hi);
    });
    return total;
  }
  const auto& ball = std::get<Ball>(set);
  if (ball.center.size() != path.dim) throw DimensionMismatch("ball centre dimension differs from the path's");
  if (ball.radius < 0.0) throw std::invalid_argument("ball radius must be nonnegative");
  if (path.dim == 1) {
    const double c = ball.center[0];
    const double r = ball.radius;
    for_each_piece(path, a, t, [&](std::size_t k, double w0, double w1, double dur) {
      total += dur * interval_fraction(cell_value(path, 0, k, w0) - c, cell_value(path, 0, k, w1) - c, -r, r);
    });
    return total;
  }
  for_each_piece(path, a, t, [&](std::size_t k, double w0, double w1, double dur) {
    total += dur * ball_fraction(path, k, w0, w1, ball);
  });
  return total;
}

double local_time_ball(const PathView& path, double a, double t, std::span<const double> x, double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  const double occ = occupation_measure(path, a, t, Ball{{x.begin(), x.end()}, epsilon});
  return occ / (ball_volume_constant(path.dim) * std::pow(epsilon, static_cast<double>(path.dim)));
}

std::string_view to_string(LocalTimeKernel k) {
  return k == LocalTimeKernel::indicator ? "indicator" : "epanechnikov";
}

LocalTimeKernel parse_kernel(std::string_view s) {
  if (s == "indicator") return LocalTimeKernel::indicator;
  if (s == "epanechnikov") return LocalTimeKernel::epanechnikov;
  throw std::invalid_argument("unknown kernel: " + std::string(s));
}

LocalTimeField local_time_field(const PathView& path, double a, std::span<const double> t_grid,
                                std::span<const double> x_grid, double epsilon, LocalTimeKernel kernel) {
  return build_field(path, a, t_grid, x_grid, epsilon, kernel, true);
}

double default_epsilon(double step, double h) { return 4.0 * std::pow(step, h); }

std::vector<double> covering_x_grid(const PathView& path, double a, double t, double epsilon, double spacing) {
  if (!(spacing > 0.0) || !(epsilon > 0.0)) throw std::invalid_argument("spacing and epsilon must be positive");
  if (path.dim != 1) throw DimensionMismatch("x-grids are one-dimensional");
  check_window(path, a, t);
  const std::size_t k0 = path.grid.cell_of(a);
  const std::size_t k1 = std::min(path.grid.cell_of(t) + 1, path.grid.n_steps());
  auto comp = path.component(0);
  const auto [mn, mx] = std::minmax_element(comp.begin() + static_cast<std::ptrdiff_t>(k0),
                                            comp.begin() + static_cast<std::ptrdiff_t>(k1) + 1);
  const auto j0 = static_cast<long long>(std::floor((*mn - epsilon) / spacing)) - 1;
  const auto j1 = static_cast<long long>(std::ceil((*mx + epsilon) / spacing)) + 1;
  std::vector<double> x;
  x.reserve(static_cast<std::size_t>(j1 - j0 + 1));
  for (long long j = j0; j <= j1; ++j) x.push_back(static_cast<double>(j) * spacing);
  return x;
}

std::vector<double> strided_t_grid(const PathView& path, double a, std::size_t stride) {
  if (stride == 0) throw std::invalid_argument("stride must be positive");
  check_window(path, a, a);
  const double dt = static_cast<double>(stride) * path.grid.step();
  const double t_end = path.grid.t_end();
  std::vector<double> t;
  for (std::size_t m = 0;; ++m) {
    const double tm = a + static_cast<double>(m) * dt;
    if (tm > t_end) {
      if (tm - t_end < 1e-9 * dt) t.push_back(t_end);
      break;
    }
    t.push_back(tm);
  }
  return t;
}

std::vector<double> occupation_identity_errors(const LocalTimeField& field) {
  std::vector<double> err(field.n_t(), 0.0);
  const auto& x = field.x_grid;
  for (std::size_t i = 0; i < field.n_t(); ++i) {
    const double span = field.t_grid[i] - field.a;
    if (span <= 0.0) continue;
    auto row = field.row(i);
    double integral = 0.0;
    for (std::size_t j = 1; j < x.size(); ++j) integral += 0.5 * (row[j] + row[j - 1]) * (x[j] - x[j - 1]);
    err[i] = std::abs(integral - span) / span;
  }
  return err;
}

EpsilonStudy epsilon_convergence_study(const PathView& path, double a, double t, std::span<const double> x_grid,
                                       std::span<const double> eps_ladder) {
  if (eps_ladder.empty()) throw std::invalid_argument("empty epsilon ladder");
  for (std::size_t r = 1; r < eps_ladder.size(); ++r)
    if (!(eps_ladder[r] < eps_ladder[r - 1])) throw std::invalid_argument("epsilon ladder must be decreasing");
  check_window(path, a, t);

  EpsilonStudy study;
  study.x_grid.assign(x_grid.begin(), x_grid.end());

  const std::size_t k0 = path.grid.cell_of(a);
  const std::size_t k1 = std::min(path.grid.cell_of(t) + 1, path.grid.n_steps());
  auto comp = path.component(0);
  std::vector<double> steps;
  bool constant = true;
  for (std::size_t k = k0; k < k1; ++k) {
    steps.push_back(std::abs(comp[k + 1] - comp[k]));
    if (comp[k + 1] != comp[k0]) constant = false;
  }
  study.degenerate_atomic = constant;
  if (!steps.empty()) {
    auto mid = steps.begin() + static_cast<std::ptrdiff_t>(steps.size() / 2);
    std::nth_element(steps.begin(), mid, steps.end());
    study.noise_floor = *mid;
  }

  const double tt[1] = {t};
  for (double eps : eps_ladder) {
    const LocalTimeField f = build_field(path, a, tt, x_grid, eps, LocalTimeKernel::indicator, false);
    EpsilonRung rung;
    rung.epsilon = eps;
    rung.snapshot = f.values;
    rung.resolved = eps >= study.noise_floor;
    if (!study.rungs.empty()) {
      const auto& prev = study.rungs.back().snapshot;
      for (std::size_t j = 0; j < prev.size(); ++j)
        rung.sup_diff = std::max(rung.sup_diff, std::abs(rung.snapshot[j] - prev[j]));
    }
    study.rungs.push_back(std::move(rung));
  }
  return study;
}

} // namespace fbmlt
