#include "fbmlt/density.h"
#include "fbmlt/errors.h"
#include "fbmlt/local_time.h"
#include "fbmlt/parallel.h"
#include "fbmlt/rng.h"
#include "fbmlt/stats.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace fbmlt {

namespace {

constexpr double kKernelCutoff = 9.0;  // exp(-40.5) is below double resolution relative to the peak
constexpr std::size_t kMinExceedances = 50;

double sup_of(const KdeEstimate& k) { return *std::max_element(k.density.begin(), k.density.end()); }

} // namespace

double KdeEstimate::sup() const { return sup_of(*this); }

std::size_t first_index_at_or_after(const TimeGrid& grid, double a) {
  std::size_t k = grid.cell_of(a);
  if (grid.time(k) < a) ++k;
  return k;
}

double silverman_bandwidth(std::span<const double> samples) {
  if (samples.size() < 2) throw std::invalid_argument("bandwidth needs at least two samples");
  const double sd = stddev(samples);
  std::vector<double> s(samples.begin(), samples.end());
  std::sort(s.begin(), s.end());
  const double n1 = static_cast<double>(s.size() - 1);
  const double q1 = s[static_cast<std::size_t>(std::floor(0.25 * n1))];
  const double q3 = s[static_cast<std::size_t>(std::ceil(0.75 * n1))];
  const double iqr = (q3 - q1) / 1.34;
  const double spread = iqr > 0.0 ? std::min(sd, iqr) : sd;
  return 0.9 * spread * std::pow(static_cast<double>(s.size()), -0.2);
}

KdeEstimate kde_increment_density(std::span<const double> samples, const KdeOptions& opt) {
  if (samples.size() < 1000) throw std::invalid_argument("kde needs at least 1000 samples");
  if (stddev(samples) == 0.0) throw DegenerateSampleError("samples have zero variance");
  if (opt.half_points == 0) throw std::invalid_argument("kde grid needs points");

  KdeEstimate out;
  out.bandwidth = opt.bandwidth ? *opt.bandwidth : opt.bandwidth_scale * silverman_bandwidth(samples);
  if (!(out.bandwidth > 0.0)) throw std::invalid_argument("bandwidth must be positive");

  const auto [mn, mx] = std::minmax_element(samples.begin(), samples.end());
  const double centre = 0.5 * (*mn + *mx);
  const double half = 0.5 * (*mx - *mn) + opt.pad * out.bandwidth;
  const auto m = static_cast<long>(opt.half_points);
  const double step = half / static_cast<double>(m);
  const double inv_bw = 1.0 / out.bandwidth;
  const double norm = 1.0 / (static_cast<double>(samples.size()) * out.bandwidth * std::sqrt(2.0 * std::numbers::pi));

  out.x.reserve(static_cast<std::size_t>(2 * m + 1));
  out.density.reserve(out.x.capacity());
  for (long k = -m; k <= m; ++k) {
    const double x = centre + static_cast<double>(k) * step;
    double acc = 0.0;
    for (double v : samples) {
      const double u = (x - v) * inv_bw;
      if (std::abs(u) <= kKernelCutoff) acc += std::exp(-0.5 * u * u);
    }
    out.x.push_back(x);
    out.density.push_back(acc * norm);
  }
  for (std::size_t j = 1; j < out.x.size(); ++j)
    out.integral += 0.5 * (out.density[j] + out.density[j - 1]) * (out.x[j] - out.x[j - 1]);
  return out;
}

std::vector<std::vector<double>> sample_increments(const PathSimulator& sim, std::size_t s_index,
                                                   std::span<const std::size_t> gap_steps, const RunOptions& run) {
  const std::size_t n = sim.source().grid.n_steps();
  for (std::size_t g : gap_steps)
    if (g == 0 || s_index + g > n) throw OutOfRangeError("gap reaches past the end of the grid");
  if (sim.source().fields.dim != 1) throw DimensionMismatch("increment sampling needs d = 1");

  const std::vector<std::size_t> gaps(gap_steps.begin(), gap_steps.end());
  auto per_path = parallel_map(run.n_paths, run.threads, [&](std::size_t p) {
    const SolutionPath x = sim.simulate(run.seed, p);
    std::vector<double> inc(gaps.size());
    for (std::size_t j = 0; j < gaps.size(); ++j) inc[j] = x.values[s_index + gaps[j]] - x.values[s_index];
    return inc;
  });
  std::vector<std::vector<double>> out(gaps.size(), std::vector<double>(run.n_paths));
  for (std::size_t p = 0; p < run.n_paths; ++p)
    for (std::size_t j = 0; j < gaps.size(); ++j) out[j][p] = per_path[p][j];
  return out;
}

DensityScalingReport sup_density_scaling(const PathSource& source, std::size_t s_index,
                                         std::span<const std::size_t> gap_steps, const RunOptions& run,
                                         const KdeOptions& kde) {
  if (source.fields.dim != 1) throw DimensionMismatch("density scaling needs d = 1");
  if (gap_steps.size() < 2) throw std::invalid_argument("density scaling needs at least two gaps");
  const TimeGrid& g = source.grid;
  const double s = g.time(s_index);
  if (!(s > 0.0)) throw OutOfRangeError("the base time s must be positive");
  std::vector<std::size_t> gaps(gap_steps.begin(), gap_steps.end());
  std::sort(gaps.begin(), gaps.end());
  if (static_cast<double>(gaps.back()) < std::pow(10.0, 1.5) * static_cast<double>(gaps.front()))
    throw std::invalid_argument("gaps must span at least 1.5 decades");

  const PathSimulator sim(source);
  const auto inc = sample_increments(sim, s_index, gaps, run);
  std::vector<double> u;
  for (std::size_t gp : gaps) u.push_back(g.time(s_index + gp));
  DensityScalingReport r =
      scaling_from_increments(s, u, inc, -static_cast<double>(source.fields.dim) * source.hurst, kde);
  r.n_paths = run.n_paths;
  return r;
}

DensityScalingReport scaling_from_increments(double s, std::span<const double> u_times,
                                             const std::vector<std::vector<double>>& increments, double theoretical_slope,
                                             const KdeOptions& kde) {
  if (u_times.size() != increments.size() || u_times.size() < 2)
    throw std::invalid_argument("need one increment sample per gap and at least two gaps");
  DensityScalingReport r;
  r.n_paths = increments.front().size();
  r.theoretical_slope = theoretical_slope;
  std::vector<double> lg, ls, ls_half, ls_double;
  for (std::size_t j = 0; j < u_times.size(); ++j) {
    const double u = u_times[j];
    if (!(u > s)) throw std::invalid_argument("gap end must follow s");
    r.gaps.emplace_back(s, u);
    const KdeEstimate est = kde_increment_density(increments[j], kde);
    KdeOptions half = kde, twice = kde;
    half.bandwidth = 0.5 * est.bandwidth;
    twice.bandwidth = 2.0 * est.bandwidth;
    r.sup_density.push_back(est.sup());
    r.bandwidth.push_back(est.bandwidth);
    r.kde_integral.push_back(est.integral);
    r.sup_density_half_bw.push_back(kde_increment_density(increments[j], half).sup());
    r.sup_density_double_bw.push_back(kde_increment_density(increments[j], twice).sup());
    lg.push_back(std::log(u - s));
    ls.push_back(std::log(r.sup_density.back()));
    ls_half.push_back(std::log(r.sup_density_half_bw.back()));
    ls_double.push_back(std::log(r.sup_density_double_bw.back()));
  }
  const LinearFit fit = fit_line(lg, ls);
  r.fitted_slope = fit.slope;
  r.slope_stderr = fit.slope_stderr;
  r.r_squared = fit.r_squared;
  r.slope_half_bw = fit_line(lg, ls_half).slope;
  r.slope_double_bw = fit_line(lg, ls_double).slope;
  return r;
}

std::vector<double> auto_tail_thresholds(std::span<const double> increments, std::size_t count) {
  std::vector<double> a;
  a.reserve(increments.size());
  for (double v : increments) a.push_back(std::abs(v));
  std::sort(a.begin(), a.end());
  if (a.size() <= 2 * kMinExceedances || count < 2)
    throw InsufficientTailSamples("too few samples for a tail fit");
  const double lo = median(a);
  const double hi = a[a.size() - kMinExceedances - 1];
  if (!(lo > 0.0) || !(hi > lo)) throw InsufficientTailSamples("tail range is empty");
  std::vector<double> r(count);
  for (std::size_t i = 0; i < count; ++i)
    r[i] = lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(count - 1));
  return r;
}

TailReport tail_fit(std::span<const double> increments, std::span<const double> thresholds, double gamma) {
  std::vector<double> a;
  a.reserve(increments.size());
  for (double v : increments) a.push_back(std::abs(v));
  std::sort(a.begin(), a.end());
  if (a.empty()) throw InsufficientTailSamples("no samples");

  TailReport r;
  r.gamma = gamma;
  r.n_samples = a.size();
  r.median_abs = median(a);
  const double n = static_cast<double>(a.size());

  bool any_above_median = false;
  std::vector<double> lx, ly;
  for (double t : thresholds) {
    if (t < r.median_abs) continue;
    any_above_median = true;
    const auto exceed = static_cast<std::size_t>(a.end() - std::upper_bound(a.begin(), a.end(), t));
    if (exceed < kMinExceedances || exceed == a.size() || !(t > 0.0)) continue;
    const double surv = static_cast<double>(exceed) / n;
    r.thresholds.push_back(t);
    r.survival.push_back(surv);
    r.log_survival.push_back(std::log(surv));
    lx.push_back(std::log(t));
    ly.push_back(std::log(-std::log(surv)));
  }
  if (!any_above_median) throw InsufficientTailSamples("all thresholds lie below the median of |increment|");
  if (lx.size() < 2) throw InsufficientTailSamples("fewer than two thresholds keep 50 exceedances");
  const LinearFit fit = fit_line(lx, ly);
  r.fitted_tail_exponent = fit.slope;
  r.slope_stderr = fit.slope_stderr;
  return r;
}

TailReport tail_decay_check(const PathSource& source, double gamma, std::size_t s_index, std::size_t gap_steps,
                            std::span<const double> thresholds, const RunOptions& run) {
  if (!(gamma > 0.0 && gamma < source.hurst)) throw std::invalid_argument("gamma must lie in (0, h)");
  const PathSimulator sim(source);
  const std::size_t gaps[1] = {gap_steps};
  const auto inc = sample_increments(sim, s_index, gaps, run);
  const std::vector<double> thr =
      thresholds.empty() ? auto_tail_thresholds(inc[0]) : std::vector<double>(thresholds.begin(), thresholds.end());
  TailReport r = tail_fit(inc[0], thr, gamma);
  r.gap = source.grid.time(s_index + gap_steps) - source.grid.time(s_index);
  return r;
}

std::vector<double> existence_values(const PathView& path, double u, double i0, double i1,
                                     std::span<const double> eps_ladder) {
  const TimeGrid& g = path.grid;
  if (!(u >= g.t_start() && u <= g.t_end())) throw OutOfRangeError("u outside the path grid");
  const std::size_t k = g.cell_of(u);
  const double w = std::clamp((u - g.time(k)) / g.step(), 0.0, 1.0);
  Ball ball;
  ball.center.resize(path.dim);
  for (std::size_t i = 0; i < path.dim; ++i) {
    const double x0 = path.at(i, k);
    const double x1 = path.at(i, k + 1);
    ball.center[i] = w == 0.0 ? x0 : (w == 1.0 ? x1 : x0 + w * (x1 - x0));
  }
  std::vector<double> out;
  for (double eps : eps_ladder) {
    if (!(eps > 0.0)) throw std::invalid_argument("epsilon must be positive");
    ball.radius = eps;
    out.push_back(occupation_measure(path, i0, i1, ball) / std::pow(eps, static_cast<double>(path.dim)));
  }
  return out;
}

ExistenceReport existence_criterion_estimate(const PathSource& source, double u, double i0, double i1,
                                             std::span<const double> eps_ladder, const RunOptions& run) {
  if (eps_ladder.size() < 2) throw std::invalid_argument("existence criterion needs at least two epsilons");
  if (run.n_paths < 2) throw std::invalid_argument("existence criterion needs at least two paths");
  const PathSimulator sim(source);
  const std::vector<double> eps(eps_ladder.begin(), eps_ladder.end());

  ExistenceReport r;
  r.n_paths = run.n_paths;
  r.per_path = parallel_map(run.n_paths, run.threads, [&](std::size_t p) {
    const SolutionPath x = sim.simulate(run.seed, p);
    return existence_values(PathView(x), u, i0, i1, eps);
  });

  std::vector<double> log_eps;
  for (double e : eps) log_eps.push_back(std::log(e));
  std::vector<double> slopes(run.n_paths), col(run.n_paths);
  double scale = 1.0;
  for (std::size_t j = 0; j < eps.size(); ++j) {
    for (std::size_t p = 0; p < run.n_paths; ++p) col[p] = r.per_path[p][j];
    ExistenceRow row;
    row.epsilon = eps[j];
    row.value = mean(col);
    row.std_error = stddev(col) / std::sqrt(static_cast<double>(run.n_paths));
    scale = std::max(scale, std::abs(row.value));
    r.rows.push_back(row);
  }
  for (std::size_t p = 0; p < run.n_paths; ++p) slopes[p] = fit_line(log_eps, r.per_path[p]).slope;
  r.slope = mean(slopes);
  r.slope_stderr = stddev(slopes) / std::sqrt(static_cast<double>(run.n_paths));
  // the small absolute floor keeps an exactly flat control from failing on rounding
  r.bounded = std::abs(r.slope) <= 2.0 * r.slope_stderr + 1e-12 * scale;
  return r;
}

std::vector<ModulusRow> smoothed_density_modulus(const PathSource& source, double x,
                                                 std::span<const double> distances, const RunOptions& run,
                                                 const ModulusOptions& opt) {
  if (source.fields.dim != 1) throw DimensionMismatch("density modulus needs d = 1");
  if (!(opt.bandwidth > 0.0)) throw std::invalid_argument("bandwidth must be positive");
  if (opt.pairs_per_path == 0 || run.n_paths < 2) throw std::invalid_argument("need paths and time pairs");
  const TimeGrid& g = source.grid;
  if (!(opt.a > g.t_start() && opt.a < g.t_end())) throw OutOfRangeError("a must lie inside the grid");
  const std::size_t k0 = first_index_at_or_after(g, opt.a);
  const std::size_t span = g.n_steps() - k0 + 1;
  const double area = (g.t_end() - opt.a) * (g.t_end() - opt.a);
  const double b = opt.bandwidth;
  const double knorm = 1.0 / (b * std::sqrt(2.0 * std::numbers::pi));
  auto kern = [&](double u) {
    const double z = u / b;
    return knorm * std::exp(-0.5 * z * z);
  };

  std::vector<double> points{x};
  for (double dist : distances) points.push_back(x + dist);

  const PathSimulator sim(source);
  const auto per_path = parallel_map(run.n_paths, run.threads, [&](std::size_t p) {
    const SolutionPath path = sim.simulate(run.seed, p);
    NormalStream pick(derive_seed(run.seed, p, 0xD5));
    std::vector<double> f(points.size(), 0.0);
    for (std::size_t m = 0; m < opt.pairs_per_path; ++m) {
      const double xs = path.values[k0 + pick.index(span)];
      const double xu = path.values[k0 + pick.index(span)];
      for (std::size_t j = 0; j < points.size(); ++j) f[j] += kern(xs - points[j]) * kern(xu - points[j]);
    }
    for (double& v : f) v *= area / static_cast<double>(opt.pairs_per_path);
    return f;
  });

  std::vector<ModulusRow> rows;
  std::vector<double> fx(run.n_paths), fy(run.n_paths), diff(run.n_paths);
  for (std::size_t p = 0; p < run.n_paths; ++p) fx[p] = per_path[p][0];
  for (std::size_t j = 0; j < distances.size(); ++j) {
    for (std::size_t p = 0; p < run.n_paths; ++p) {
      fy[p] = per_path[p][j + 1];
      diff[p] = fx[p] - fy[p];
    }
    ModulusRow row;
    row.distance = distances[j];
    row.x = x;
    row.y = points[j + 1];
    row.v_x = mean(fx);
    row.v_y = mean(fy);
    row.difference = std::abs(mean(diff));
    row.std_error = stddev(diff) / std::sqrt(static_cast<double>(run.n_paths));
    rows.push_back(row);
  }
  return rows;
}

} // namespace fbmlt
