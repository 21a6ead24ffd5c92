#include "fbmlt/experiment.h"
#include "fbmlt/density.h"
#include "fbmlt/errors.h"
#include "fbmlt/fbm.h"
#include "fbmlt/holder.h"
#include "fbmlt/local_time.h"
#include "fbmlt/parallel.h"
#include "fbmlt/rng.h"
#include "fbmlt/sde.h"
#include "fbmlt/simulate.h"
#include "fbmlt/stats.h"
#include "fbmlt/version.h"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>

namespace fbmlt {

namespace {

using Row = std::vector<double>;

template <class Fn>
auto per_replication(std::size_t n, std::size_t threads, Fn&& fn) {
  return parallel_map(n, threads, [&](std::size_t r) {
    try {
      return fn(r);
    } catch (const ReplicationError&) {
      throw;
    } catch (const std::exception& e) {
      throw ReplicationError(e.what(), r);
    }
  });
}

Check make_check(std::string name, double value, std::string op, double threshold) {
  bool pass = false;
  if (op == "<=") pass = value <= threshold;
  else if (op == ">=") pass = value >= threshold;
  else if (op == "<") pass = value < threshold;
  else if (op == "==") pass = value == threshold;
  return {std::move(name), value, std::move(op), threshold, pass};
}

PathSource make_source(const ExperimentConfig& c) {
  PathSource s;
  s.fields = make_field_set(c.field, c.d, c.sigma);
  s.hurst = c.h;
  s.x0 = c.x0;
  s.grid = TimeGrid(0.0, c.T, c.n_steps);
  s.scheme = parse_scheme(c.scheme);
  s.substeps = c.substeps;
  s.method = parse_fbm_method(c.method);
  s.driver = parse_driver(c.driver);
  return s;
}

RunOptions run_options(const ExperimentConfig& c) { return {c.n_paths, c.master_seed, c.threads}; }

double field_epsilon(const ExperimentConfig& c) {
  if (c.epsilon) return *c.epsilon;
  return c.epsilon_mult * std::pow(c.T / static_cast<double>(c.n_steps), c.h);
}

HolderOptions holder_options(const ExperimentConfig& c) {
  HolderOptions o;
  o.windows = parse_window_policy(c.window_policy);
  o.n_windows = c.n_windows;
  o.two_sided = c.two_sided;
  return o;
}

double max_of(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, x);
  return m;
}

double column_max(const PerPathTable& t, std::size_t col) {
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& r : t.rows) m = std::max(m, r[col]);
  return m;
}

double column_sum(const PerPathTable& t, std::size_t col) {
  double s = 0.0;
  for (const auto& r : t.rows) s += r[col];
  return s;
}

std::vector<double> column(const PerPathTable& t, std::size_t col) {
  std::vector<double> v;
  v.reserve(t.rows.size());
  for (const auto& r : t.rows) v.push_back(r[col]);
  return v;
}

void add_target_checks(ExperimentResult& out, const std::string& what, double value, std::optional<double> target,
                       double tolerance) {
  const auto& c = out.config;
  if (target) out.checks.push_back(make_check(what + "_deviation", std::abs(value - *target), "<=", tolerance));
  if (c.lower) out.checks.push_back(make_check(what + "_lower", value, ">=", *c.lower));
  if (c.upper) out.checks.push_back(make_check(what + "_upper", value, "<=", *c.upper));
}

// Local-time field of a simulated path with the config's epsilon, strides and kernel.
LocalTimeField sde_field(const ExperimentConfig& c, const PathView& view) {
  const double eps = field_epsilon(c);
  const double a = c.a_value();
  const auto tg = strided_t_grid(view, a, c.t_stride);
  const auto xg = covering_x_grid(view, a, view.grid.t_end(), eps, c.x_spacing * eps);
  return local_time_field(view, a, tg, xg, eps, parse_kernel(c.kernel));
}

std::vector<double> uniform_nodes(double lo, double hi, std::size_t intervals) {
  std::vector<double> v(intervals + 1);
  for (std::size_t i = 0; i <= intervals; ++i)
    v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(intervals);
  v.back() = hi;
  return v;
}

// ---------------------------------------------------------------------------

void run_fbm_validate(ExperimentResult& out) {
  const auto& c = out.config;
  const HurstParameter h(c.h);
  const TimeGrid grid(0.0, c.T, c.n_steps);
  const FbmSampler sampler(h, grid, parse_fbm_method(c.method));

  if (c.fbm_check == "covariance") {
    struct Block {
      std::optional<IncrementCovarianceAccumulator> acc;
      std::vector<Row> rows;
    };
    constexpr std::size_t kBlock = 250;
    const std::size_t n_blocks = (c.n_paths + kBlock - 1) / kBlock;
    auto blocks = parallel_map(n_blocks, c.threads, [&](std::size_t b) {
      Block blk;
      blk.acc.emplace(h, grid);
      const std::size_t end = std::min(c.n_paths, (b + 1) * kBlock);
      for (std::size_t r = b * kBlock; r < end; ++r) {
        const FbmPath p = sampler.sample(1, c.master_seed, r);
        blk.acc->add(p);
        double qv = 0.0;
        for (std::size_t k = 0; k < grid.n_steps(); ++k) qv += std::pow(p.at(0, k + 1) - p.at(0, k), 2);
        blk.rows.push_back({static_cast<double>(r), p.at(0, grid.n_steps()), qv});
      }
      return blk;
    });
    IncrementCovarianceAccumulator total(h, grid);
    out.per_path.columns = {"replication", "endpoint", "sum_sq_increments"};
    for (auto& blk : blocks) {
      total.merge(*blk.acc);
      for (auto& r : blk.rows) out.per_path.rows.push_back(std::move(r));
    }
    const auto rep = total.report();
    out.pooled["max_abs_z"] = rep.max_abs_z;
    out.pooled["max_abs_error"] = rep.max_abs_error;
    out.pooled["n_entries"] = static_cast<double>(rep.n_increments * (rep.n_increments + 1) / 2);
    out.pooled["clipped_eigenvalues"] = static_cast<double>(sampler.clipped_eigenvalues());
    const auto endpoints = column(out.per_path, 1);
    out.pooled["endpoint_variance"] = std::pow(stddev(endpoints), 2);
    out.pooled["endpoint_variance_exact"] = std::pow(c.T, 2.0 * c.h);
    out.checks.push_back(make_check("max_abs_z", rep.max_abs_z, "<=", c.z_max));
    return;
  }

  // path_holder
  const auto lags = dyadic_ladder(c.n_steps, c.n_windows, c.min_lag);
  const auto opt = holder_options(c);
  out.per_path.columns = {"replication", "exponent", "stderr", "r2", "n_scales"};
  out.per_path.rows = per_replication(c.n_paths, c.threads, [&](std::size_t r) {
    const FbmPath p = sampler.sample(1, c.master_seed, r);
    const auto est = estimate_path_holder(PathView(p), lags, opt);
    return Row{static_cast<double>(r), est.exponent, est.slope_stderr, est.r_squared,
               static_cast<double>(est.n_scales)};
  });
  const auto exps = column(out.per_path, 1);
  const auto pooled = pool_median(exps);
  out.pooled["median_exponent"] = pooled.median;
  out.pooled["ci_low"] = pooled.ci_low;
  out.pooled["ci_high"] = pooled.ci_high;
  out.pooled["mean_exponent"] = mean(exps);
  add_target_checks(out, "exponent", pooled.median, c.target ? c.target : std::optional<double>(c.h), c.tolerance);
}

void run_sde_converge(ExperimentResult& out) {
  const auto& c = out.config;
  const auto vf = make_field_set(c.field, 1, c.sigma);
  ConvergenceOptions opt;
  opt.t_end = c.T;
  opt.n_paths = c.n_paths;
  opt.seed = c.master_seed;
  opt.substeps = c.substeps;
  const auto table = convergence_study(vf, c.x0[0], HurstParameter(c.h), parse_scheme(c.scheme), c.step_ladder, opt);

  out.per_path.columns = {"replication"};
  for (const auto& row : table.rows) out.per_path.columns.push_back("sup_error_n" + std::to_string(row.n_steps));
  for (std::size_t p = 0; p < table.per_path_errors.size(); ++p) {
    Row r{static_cast<double>(p)};
    r.insert(r.end(), table.per_path_errors[p].begin(), table.per_path_errors[p].end());
    out.per_path.rows.push_back(std::move(r));
  }
  for (const auto& row : table.rows) out.pooled["sup_error_n" + std::to_string(row.n_steps)] = row.sup_error;
  out.pooled["fitted_order"] = table.fitted_order;
  for (std::size_t i = 1; i < table.rows.size(); ++i) {
    const double prev = table.rows[i - 1].sup_error;
    const double ratio = prev > 0.0 ? table.rows[i].sup_error / prev : 0.0;
    out.checks.push_back(make_check("monotone_n" + std::to_string(table.rows[i].n_steps), ratio, "<=",
                                    1.0 + c.monotone_slack));
  }
  out.checks.push_back(make_check("final_sup_error", table.rows.back().sup_error, "<", c.max_final_error));
}

void run_localtime_identity(ExperimentResult& out) {
  const auto& c = out.config;
  const PathSimulator sim(make_source(c));
  out.per_path.columns = {"replication", "max_identity_error", "n_t", "n_x", "epsilon"};
  out.per_path.rows = per_replication(c.n_paths, c.threads, [&](std::size_t r) {
    const SolutionPath x = sim.simulate(c.master_seed, r);
    const auto field = sde_field(c, PathView(x));
    return Row{static_cast<double>(r), max_of(occupation_identity_errors(field)), static_cast<double>(field.n_t()),
               static_cast<double>(field.n_x()), field.epsilon};
  });
  const double worst = column_max(out.per_path, 1);
  out.pooled["max_identity_error"] = worst;
  out.pooled["mean_identity_error"] = mean(column(out.per_path, 1));
  out.checks.push_back(make_check("max_identity_error", worst, "<", c.identity_tol));
}

// L(t, x) = g(x) (1 + W(t)) with W an fBm of index beta on the t-grid:
// time exponent beta. For the space variant the roles swap.
LocalTimeField planted_field(const ExperimentConfig& c, const FbmSampler& w, std::size_t r, bool space) {
  const FbmPath p = w.sample(1, c.master_seed, r);
  LocalTimeField f;
  f.a = c.a_value();
  const std::size_t m = p.grid.n_steps();
  if (!space) {
    f.t_grid = p.grid.times();
    f.x_grid = uniform_nodes(-4.0, 4.0, 160);
  } else {
    f.t_grid = uniform_nodes(f.a, c.T, 64);
    // W runs on [0, 4]; shift it onto x in [-2, 2]
    f.x_grid = uniform_nodes(-2.0, 2.0, m);
  }
  f.epsilon = f.x_grid[1] - f.x_grid[0];
  f.values.resize(f.n_t() * f.n_x());
  for (std::size_t i = 0; i < f.n_t(); ++i)
    for (std::size_t j = 0; j < f.n_x(); ++j) {
      double v;
      if (!space) {
        const double x = f.x_grid[j];
        v = std::exp(-0.5 * x * x) * (1.0 + p.at(0, i));
      } else {
        v = (f.t_grid[i] - f.a) * (1.0 + p.at(0, j));
      }
      f.values[i * f.n_x() + j] = v;
    }
  return f;
}

void run_holder(ExperimentResult& out, bool space) {
  const auto& c = out.config;
  const auto opt = holder_options(c);
  const bool planted = c.source == "planted";

  std::optional<PathSimulator> sim;
  std::optional<FbmSampler> w;
  if (planted) {
    const std::size_t m = std::max<std::size_t>(1, c.n_steps / c.t_stride);
    const TimeGrid g = space ? TimeGrid(0.0, 4.0, m) : TimeGrid(c.a_value(), c.T, m);
    w.emplace(HurstParameter(c.beta), g, parse_fbm_method(c.method));
  } else {
    sim.emplace(make_source(c));
  }

  out.per_path.columns = {"replication", "exponent", "stderr", "r2", "n_scales", "resolution_capped",
                          "max_identity_error", "inequality_violations", "max_inequality_ratio"};
  out.per_path.rows = per_replication(c.n_paths, c.threads, [&](std::size_t r) {
    std::optional<SolutionPath> x;
    LocalTimeField field;
    if (planted) {
      field = planted_field(c, *w, r, space);
    } else {
      x = sim->simulate(c.master_seed, r);
      field = sde_field(c, PathView(*x));
    }
    const std::size_t intervals = space ? field.n_x() - 1 : field.n_t() - 1;
    const auto lags = dyadic_ladder(intervals, c.n_windows, c.min_lag);
    const auto est = space ? estimate_holder_space(field, lags, opt) : estimate_holder_time(field, lags, opt);

    double identity = 0.0, violations = 0.0, max_ratio = 0.0;
    if (!planted) identity = max_of(occupation_identity_errors(field));
    if (!planted && !space && c.check_inequality) {
      for (const auto& row : lower_bound_check(PathView(*x), field, 0, lags, c.inequality_tol)) {
        if (!row.holds) violations += 1.0;
        max_ratio = std::max(max_ratio, row.ratio);
      }
    }
    return Row{static_cast<double>(r), est.exponent, est.slope_stderr, est.r_squared,
               static_cast<double>(est.n_scales), est.resolution_capped ? 1.0 : 0.0, identity, violations, max_ratio};
  });

  const auto exps = column(out.per_path, 1);
  const auto pooled = pool_median(exps);
  out.pooled["median_exponent"] = pooled.median;
  out.pooled["ci_low"] = pooled.ci_low;
  out.pooled["ci_high"] = pooled.ci_high;
  out.pooled["mean_exponent"] = mean(exps);
  out.pooled["capped_paths"] = column_sum(out.per_path, 5);
  std::optional<double> target = c.target;
  if (!target && planted) target = c.beta;
  add_target_checks(out, "exponent", pooled.median, target, c.tolerance);
  if (!planted) {
    const double worst = column_max(out.per_path, 6);
    out.pooled["max_identity_error"] = worst;
    out.checks.push_back(make_check("max_identity_error", worst, "<", c.identity_tol));
  }
  if (!planted && !space && c.check_inequality) {
    const double v = column_sum(out.per_path, 7);
    out.pooled["inequality_violations"] = v;
    out.pooled["max_inequality_ratio"] = column_max(out.per_path, 8);
    out.checks.push_back(make_check("inequality_violations", v, "==", 0.0));
  }
}

std::vector<std::vector<double>> draw_increments(const ExperimentConfig& c, std::vector<double>& u_times) {
  const PathSimulator sim(make_source(c));
  u_times.clear();
  for (std::size_t g : c.gap_steps) {
    if (c.s_step + g > c.n_steps) throw std::invalid_argument("s_step + gap exceeds n_steps");
    u_times.push_back(sim.source().grid.time(c.s_step + g));
  }
  return sample_increments(sim, c.s_step, c.gap_steps, run_options(c));
}

void increments_table(ExperimentResult& out, const std::vector<std::vector<double>>& inc) {
  const auto& c = out.config;
  out.per_path.columns = {"replication"};
  for (std::size_t g : c.gap_steps) out.per_path.columns.push_back("increment_gap" + std::to_string(g));
  out.per_path.rows.resize(c.n_paths);
  for (std::size_t p = 0; p < c.n_paths; ++p) {
    Row r{static_cast<double>(p)};
    for (const auto& g : inc) r.push_back(g[p]);
    out.per_path.rows[p] = std::move(r);
  }
}

void run_density_scaling(ExperimentResult& out) {
  const auto& c = out.config;
  std::vector<double> u_times;
  const auto inc = draw_increments(c, u_times);
  increments_table(out, inc);

  const TimeGrid grid(0.0, c.T, c.n_steps);
  const double theoretical = c.target ? *c.target : -static_cast<double>(c.d) * c.h;
  const auto rep = scaling_from_increments(grid.time(c.s_step), u_times, inc, theoretical);
  out.pooled["fitted_slope"] = rep.fitted_slope;
  out.pooled["theoretical_slope"] = rep.theoretical_slope;
  out.pooled["slope_stderr"] = rep.slope_stderr;
  out.pooled["r2"] = rep.r_squared;
  out.pooled["slope_half_bw"] = rep.slope_half_bw;
  out.pooled["slope_double_bw"] = rep.slope_double_bw;
  double worst_norm = 0.0;
  for (std::size_t j = 0; j < rep.gaps.size(); ++j) {
    const std::string g = std::to_string(c.gap_steps[j]);
    out.pooled["sup_density_gap" + g] = rep.sup_density[j];
    out.pooled["bandwidth_gap" + g] = rep.bandwidth[j];
    worst_norm = std::max(worst_norm, std::abs(rep.kde_integral[j] - 1.0));
  }
  out.pooled["max_kde_normalization_error"] = worst_norm;
  const double tol = std::max(c.stderr_mult * rep.slope_stderr, c.tolerance);
  out.checks.push_back(make_check("slope_deviation", std::abs(rep.fitted_slope - theoretical), "<=", tol));
  out.checks.push_back(make_check("kde_normalization", worst_norm, "<=", 0.01));
}

void run_tail_check(ExperimentResult& out) {
  const auto& c = out.config;
  const double gamma = c.gamma ? *c.gamma : 0.8 * c.h;
  std::vector<double> u_times;
  const auto inc = draw_increments(c, u_times);
  increments_table(out, inc);
  const auto thr = c.thresholds.empty() ? auto_tail_thresholds(inc[0]) : c.thresholds;
  const auto rep = tail_fit(inc[0], thr, gamma);
  out.pooled["gamma"] = gamma;
  out.pooled["fitted_tail_exponent"] = rep.fitted_tail_exponent;
  out.pooled["slope_stderr"] = rep.slope_stderr;
  out.pooled["bound_exponent"] = 2.0 * gamma;
  out.pooled["median_abs"] = rep.median_abs;
  out.pooled["n_thresholds"] = static_cast<double>(rep.thresholds.size());
  out.checks.push_back(make_check("tail_exponent", rep.fitted_tail_exponent, ">=", 2.0 * gamma - c.tail_margin));
}

void run_existence(ExperimentResult& out) {
  const auto& c = out.config;
  const double i0 = c.interval.empty() ? c.a_value() : c.interval[0];
  const double i1 = c.interval.empty() ? c.T : c.interval[1];
  const auto rep = existence_criterion_estimate(make_source(c), *c.u, i0, i1, c.eps_ladder, run_options(c));

  out.per_path.columns = {"replication"};
  for (std::size_t k = 0; k < c.eps_ladder.size(); ++k) out.per_path.columns.push_back("value_eps" + std::to_string(k));
  double worst_dev = 0.0;
  for (std::size_t p = 0; p < rep.per_path.size(); ++p) {
    Row r{static_cast<double>(p)};
    for (double v : rep.per_path[p]) {
      r.push_back(v);
      if (c.expect_value) worst_dev = std::max(worst_dev, std::abs(v - *c.expect_value));
    }
    out.per_path.rows.push_back(std::move(r));
  }
  double scale = 1.0;
  for (std::size_t k = 0; k < rep.rows.size(); ++k) {
    out.pooled["epsilon" + std::to_string(k)] = rep.rows[k].epsilon;
    out.pooled["value_eps" + std::to_string(k)] = rep.rows[k].value;
    out.pooled["stderr_eps" + std::to_string(k)] = rep.rows[k].std_error;
    scale = std::max(scale, std::abs(rep.rows[k].value));
  }
  out.pooled["slope"] = rep.slope;
  out.pooled["slope_stderr"] = rep.slope_stderr;
  if (c.expect == "bounded")
    out.checks.push_back(make_check("growth_slope", std::abs(rep.slope), "<=", 2.0 * rep.slope_stderr + 1e-12 * scale));
  else
    out.checks.push_back(make_check("growth_slope", rep.slope, "<", -2.0 * rep.slope_stderr));
  if (c.expect_value) {
    out.pooled["max_value_deviation"] = worst_dev;
    out.checks.push_back(make_check("value_deviation", worst_dev, "<=", c.value_tol));
  }
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

nlohmann::json number_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

} // namespace

std::string per_path_digest(const PerPathTable& table) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  auto absorb = [&](const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      hash ^= b[i];
      hash *= 0x100000001b3ULL;
    }
  };
  for (const auto& col : table.columns) absorb(col.data(), col.size() + 1);
  for (const auto& row : table.rows)
    for (double v : row) {
      std::uint64_t bits;
      std::memcpy(&bits, &v, sizeof bits);
      absorb(&bits, sizeof bits);
    }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << hash;
  return os.str();
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  ExperimentResult out;
  out.config = cfg;
  out.version = kVersion;
  out.seeds.reserve(cfg.n_paths);
  for (std::size_t r = 0; r < cfg.n_paths; ++r) out.seeds.push_back(derive_seed(cfg.master_seed, r));

  switch (cfg.kind) {
    case ExperimentKind::fbm_validate: run_fbm_validate(out); break;
    case ExperimentKind::sde_converge: run_sde_converge(out); break;
    case ExperimentKind::localtime_identity: run_localtime_identity(out); break;
    case ExperimentKind::holder_time: run_holder(out, false); break;
    case ExperimentKind::holder_space: run_holder(out, true); break;
    case ExperimentKind::density_scaling: run_density_scaling(out); break;
    case ExperimentKind::tail_check: run_tail_check(out); break;
    case ExperimentKind::existence: run_existence(out); break;
  }

  out.pass = std::all_of(out.checks.begin(), out.checks.end(), [](const Check& ch) { return ch.pass; });
  out.digest = per_path_digest(out.per_path);
  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

void write_report(const ExperimentResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto& c = result.config;

  nlohmann::json j;
  j["version"] = result.version;
  j["kind"] = std::string(to_string(c.kind));
  j["name"] = c.name;
  j["config"] = c.entries;
  j["master_seed"] = c.master_seed;
  j["seed_rule"] = "path r uses derive_seed(master_seed, r); component i uses derive_seed(path seed, i)";
  j["seeds"] = result.seeds;
  j["per_path"] = {{"file", "per_path.csv"},
                   {"columns", result.per_path.columns},
                   {"rows", result.per_path.rows.size()},
                   {"digest", result.digest}};
  nlohmann::json pooled = nlohmann::json::object();
  for (const auto& [k, v] : result.pooled) pooled[k] = number_or_null(v);
  j["pooled"] = pooled;
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& ch : result.checks)
    checks.push_back({{"name", ch.name},
                      {"value", number_or_null(ch.value)},
                      {"op", ch.op},
                      {"threshold", number_or_null(ch.threshold)},
                      {"pass", ch.pass}});
  j["checks"] = checks;
  j["pass"] = result.pass;
  j["wall_seconds"] = result.wall_seconds;
  j["notes"] = result.notes;

  {
    std::ofstream out(dir / "report.json");
    if (!out) throw std::runtime_error("cannot write " + (dir / "report.json").string());
    out << j.dump(2) << '\n';
  }
  {
    std::ofstream out(dir / "per_path.csv");
    if (!out) throw std::runtime_error("cannot write " + (dir / "per_path.csv").string());
    for (std::size_t i = 0; i < result.per_path.columns.size(); ++i)
      out << (i ? "," : "") << result.per_path.columns[i];
    out << ",seed\n";
    for (std::size_t p = 0; p < result.per_path.rows.size(); ++p) {
      const auto& row = result.per_path.rows[p];
      for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << fmt(row[i]);
      out << ',' << (p < result.seeds.size() ? result.seeds[p] : 0) << '\n';
    }
  }
  {
    std::ofstream out(dir / "summary.csv");
    if (!out) throw std::runtime_error("cannot write " + (dir / "summary.csv").string());
    out << "section,name,value,op,threshold,pass\n";
    for (const auto& [k, v] : result.pooled) out << "pooled," << k << ',' << fmt(v) << ",,,\n";
    for (const auto& ch : result.checks)
      out << "check," << ch.name << ',' << fmt(ch.value) << ',' << ch.op << ',' << fmt(ch.threshold) << ','
          << (ch.pass ? "true" : "false") << '\n';
  }
}

ReplayResult replay(const std::filesystem::path& report, const std::map<std::string, std::string>& overrides) {
  for (const auto& [k, v] : overrides)
    if (k != "threads" && k != "output")
      throw ConfigError({k + ": configs are immutable on replay (only threads and output may change)"});

  std::ifstream in(report);
  if (!in) throw CorruptFileError("cannot open " + report.string());
  nlohmann::json j;
  std::map<std::string, std::string> entries;
  ReplayResult rr;
  try {
    in >> j;
    entries = j.at("config").get<std::map<std::string, std::string>>();
    rr.recorded_digest = j.at("per_path").at("digest").get<std::string>();
    rr.recorded_version = j.at("version").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw CorruptFileError(report.string() + ": " + e.what());
  }
  if (rr.recorded_version != kVersion)
    std::clog << "warning: report was written by version " << rr.recorded_version << ", replaying with " << kVersion
              << '\n';

  std::string text;
  for (const auto& [k, v] : entries) text += k + " = " + v + "\n";
  ExperimentConfig cfg = parse_config(text);
  if (!overrides.empty()) cfg = with_overrides(cfg, overrides);
  rr.result = run_experiment(cfg);
  rr.identical = rr.result.digest == rr.recorded_digest;
  return rr;
}

SuiteResult run_suite(const std::filesystem::path& manifest, const std::filesystem::path& out_dir,
                      const std::map<std::string, std::string>& overrides) {
  std::ifstream in(manifest);
  if (!in) throw ConfigError({"cannot read manifest " + manifest.string()});
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line.erase(0, line.find_first_not_of(" \t\r"));
    line.erase(line.find_last_not_of(" \t\r") + 1);
    if (!line.empty()) lines.push_back(line);
  }

  SuiteResult suite;
  std::filesystem::create_directories(out_dir);
  for (const auto& line : lines) {
    SuiteRow row;
    row.config = line;
    const auto path = manifest.parent_path() / line;
    row.name = std::filesystem::path(line).stem().string();
    try {
      ExperimentConfig cfg = load_config(path);
      if (!overrides.empty()) cfg = with_overrides(cfg, overrides);
      if (!cfg.name.empty()) row.name = cfg.name;
      const auto result = run_experiment(cfg);
      write_report(result, out_dir / row.name);
      row.status = result.pass ? "pass" : "fail";
      row.digest = result.digest;
      row.wall_seconds = result.wall_seconds;
    } catch (const ConfigError& e) {
      row.status = "invalid";
      for (const auto& issue : e.issues()) row.message += (row.message.empty() ? "" : "; ") + issue;
    } catch (const std::exception& e) {
      row.status = "error";
      row.message = e.what();
    }
    if (row.status != "pass") suite.all_pass = false;
    suite.rows.push_back(std::move(row));
  }

  std::ofstream out(out_dir / "summary.csv");
  if (!out) throw std::runtime_error("cannot write " + (out_dir / "summary.csv").string());
  out << "config,name,status,digest,wall_seconds,message\n";
  for (const auto& r : suite.rows) {
    std::string msg = r.message;
    std::replace(msg.begin(), msg.end(), '"', '\'');
    out << r.config << ',' << r.name << ',' << r.status << ',' << r.digest << ',' << fmt(r.wall_seconds) << ",\"" << msg
        << "\"\n";
  }
  return suite;
}

} // namespace fbmlt
