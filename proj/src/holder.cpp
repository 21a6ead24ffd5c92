#include "fbmlt/holder.h"
#include "fbmlt/errors.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace fbmlt {

namespace {

double uniform_spacing(std::span<const double> g, const char* what) {
  if (g.size() < 2) throw std::invalid_argument(std::string(what) + " needs at least two points");
  const double h = (g.back() - g.front()) / static_cast<double>(g.size() - 1);
  for (std::size_t i = 1; i < g.size(); ++i)
    if (std::abs((g[i] - g[i - 1]) - h) > 1e-9 * h)
      throw std::invalid_argument(std::string(what) + " must be uniform");
  return h;
}

// incr(s, l) = sup over the other axis of |f(s + l) - f(s)|.
template <class Incr>
HolderEstimate fit_scales(std::size_t n_intervals, double spacing, std::span<const std::size_t> lags,
                          const HolderOptions& opt, HolderMode mode, Incr&& incr) {
  if (lags.size() < 4) throw std::invalid_argument("Holder regression needs at least 4 scales");
  if (opt.n_windows == 0) throw std::invalid_argument("n_windows must be positive");
  HolderEstimate est;
  est.mode = mode;
  std::vector<double> lx, ly;
  for (std::size_t lag : lags) {
    if (lag == 0 || lag > n_intervals) throw std::invalid_argument("lag outside the grid");
    if (opt.windows == WindowPolicy::fixed_windows && lag * opt.n_windows > n_intervals)
      throw std::invalid_argument("lag " + std::to_string(lag) + " leaves fewer than " +
                                  std::to_string(opt.n_windows) + " increment windows");
    double m = 0.0;
    auto visit = [&](std::size_t s) {
      if (s + lag <= n_intervals) m = std::max(m, incr(s, lag));
      if (opt.two_sided && s >= lag) m = std::max(m, incr(s - lag, lag));
    };
    if (opt.windows == WindowPolicy::fixed_windows) {
      for (std::size_t k = 0; k < opt.n_windows; ++k) visit(k * n_intervals / opt.n_windows);
    } else {
      for (std::size_t s = 0; s + lag <= n_intervals; ++s) visit(s);
    }
    const double delta = static_cast<double>(lag) * spacing;
    est.deltas.push_back(delta);
    est.maxima.push_back(m);
    if (m > 0.0) {
      lx.push_back(std::log(delta));
      ly.push_back(std::log(m));
    }
  }
  if (lx.empty()) throw DegenerateFitError("all increments vanish; the field is empty on this range");
  if (lx.size() < 4) throw DegenerateFitError("fewer than 4 scales with nonzero increments");
  const LinearFit fit = fit_line(lx, ly);
  est.exponent = fit.slope;
  est.slope_stderr = fit.slope_stderr;
  est.r_squared = fit.r_squared;
  est.n_scales = lx.size();
  est.delta_min = *std::min_element(est.deltas.begin(), est.deltas.end());
  est.delta_max = *std::max_element(est.deltas.begin(), est.deltas.end());
  est.resolution_capped = est.exponent >= opt.cap;
  return est;
}

} // namespace

std::string_view to_string(HolderMode m) {
  switch (m) {
    case HolderMode::time_uniform_in_x: return "time_uniform_in_x";
    case HolderMode::space: return "space";
    case HolderMode::path: return "path";
  }
  return "path";
}

std::string_view to_string(WindowPolicy p) { return p == WindowPolicy::sliding ? "sliding" : "fixed_windows"; }

WindowPolicy parse_window_policy(std::string_view s) {
  if (s == "fixed_windows") return WindowPolicy::fixed_windows;
  if (s == "sliding") return WindowPolicy::sliding;
  throw std::invalid_argument("unknown window policy: " + std::string(s));
}

std::vector<std::size_t> dyadic_ladder(std::size_t n_intervals, std::size_t n_windows, std::size_t smallest) {
  if (n_windows == 0 || smallest == 0) throw std::invalid_argument("dyadic_ladder: arguments must be positive");
  std::vector<std::size_t> lags;
  for (std::size_t l = smallest; l * n_windows <= n_intervals; l *= 2) lags.push_back(l);
  return lags;
}

HolderEstimate estimate_holder_time(const LocalTimeField& field, std::span<const std::size_t> lags,
                                    const HolderOptions& opt) {
  const double dt = uniform_spacing(field.t_grid, "t_grid");
  const std::size_t nx = field.n_x();
  return fit_scales(field.n_t() - 1, dt, lags, opt, HolderMode::time_uniform_in_x, [&](std::size_t s, std::size_t l) {
    const double* r0 = field.values.data() + s * nx;
    const double* r1 = field.values.data() + (s + l) * nx;
    double m = 0.0;
    for (std::size_t j = 0; j < nx; ++j) m = std::max(m, std::abs(r1[j] - r0[j]));
    return m;
  });
}

HolderEstimate estimate_holder_space(const LocalTimeField& field, std::span<const std::size_t> lags,
                                     const HolderOptions& opt) {
  const double dx = uniform_spacing(field.x_grid, "x_grid");
  const std::size_t nx = field.n_x();
  return fit_scales(nx - 1, dx, lags, opt, HolderMode::space, [&](std::size_t s, std::size_t l) {
    double m = 0.0;
    for (std::size_t i = 0; i < field.n_t(); ++i) {
      const double* r = field.values.data() + i * nx;
      m = std::max(m, std::abs(r[s + l] - r[s]));
    }
    return m;
  });
}

HolderEstimate estimate_path_holder(const PathView& path, std::span<const std::size_t> lags,
                                    const HolderOptions& opt, std::size_t component) {
  if (component >= path.dim) throw DimensionMismatch("component index out of range");
  auto x = path.component(component);
  return fit_scales(path.grid.n_steps(), path.grid.step(), lags, opt, HolderMode::path,
                    [&](std::size_t s, std::size_t l) { return std::abs(x[s + l] - x[s]); });
}

std::vector<LowerBoundRow> lower_bound_check(const PathView& path, const LocalTimeField& field, std::size_t i0,
                                             std::span<const std::size_t> lags, double tol) {
  if (path.dim != 1) throw DimensionMismatch("lower_bound_check needs a one-dimensional path");
  if (i0 >= field.n_t()) throw OutOfRangeError("anchor index outside the field");
  const TimeGrid& g = path.grid;
  auto x = path.component(0);
  auto value_at = [&](double t) {
    const std::size_t k = g.cell_of(t);
    const double w = std::clamp((t - g.time(k)) / g.step(), 0.0, 1.0);
    return x[k] + w * (x[k + 1] - x[k]);
  };

  std::vector<LowerBoundRow> rows;
  const std::size_t nx = field.n_x();
  for (std::size_t lag : lags) {
    const std::size_t i1 = i0 + lag;
    if (lag == 0 || i1 >= field.n_t()) throw OutOfRangeError("t + delta lies outside the field");
    const double t0 = field.t_grid[i0];
    const double t1 = field.t_grid[i1];
    LowerBoundRow r;
    r.delta = t1 - t0;

    auto row0 = field.row(i0);
    auto row1 = field.row(i1);
    for (std::size_t j = 0; j < nx; ++j) r.sup_increment = std::max(r.sup_increment, std::abs(row1[j] - row0[j]));
    for (std::size_t j = 1; j < nx; ++j)
      r.integral += 0.5 * ((row1[j] - row0[j]) + (row1[j - 1] - row0[j - 1])) *
                    (field.x_grid[j] - field.x_grid[j - 1]);
    r.integral_rel_error = std::abs(r.integral - r.delta) / r.delta;

    double lo = value_at(t0), hi = lo;
    const double v1 = value_at(t1);
    lo = std::min(lo, v1);
    hi = std::max(hi, v1);
    for (std::size_t k = g.cell_of(t0) + 1; k < g.n_points() && g.time(k) < t1; ++k) {
      lo = std::min(lo, x[k]);
      hi = std::max(hi, x[k]);
    }
    r.oscillation = hi - lo;
    r.rhs = 2.0 * r.sup_increment * r.oscillation;
    r.ratio = r.rhs > 0.0 ? r.delta / r.rhs : std::numeric_limits<double>::infinity();
    r.holds = r.delta <= r.rhs * (1.0 + tol);
    rows.push_back(r);
  }
  return rows;
}

PooledHolder pool_exponents(std::span<const HolderEstimate> estimates, std::uint64_t seed) {
  PooledHolder out;
  for (const auto& e : estimates) out.exponents.push_back(e.exponent);
  out.pooled = pool_median(out.exponents, 0.95, 2000, seed);
  return out;
}

} // namespace fbmlt
