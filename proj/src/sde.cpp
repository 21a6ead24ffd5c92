#include "fbmlt/sde.h"
#include "fbmlt/errors.h"
#include "fbmlt/rng.h"
#include "fbmlt/scale_map.h"
#include "fbmlt/stats.h"

#include <Eigen/Dense>

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace fbmlt {

namespace {

// Diagonal field V_i = c(x_i) e_i.
VectorField diagonal_field(std::size_t dim, std::size_t i, double (*c)(double), double (*dc)(double),
                           double (*d2c)(double)) {
  VectorField f;
  f.value = [=](std::span<const double> x, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    out[i] = c(x[i]);
  };
  f.jacobian = [=](std::span<const double> x, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    out[i * dim + i] = dc(x[i]);
  };
  f.hessian = [=](std::span<const double> x, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    out[(i * dim + i) * dim + i] = d2c(x[i]);
  };
  return f;
}

void check_dim(const VectorFieldSet& vf, std::size_t n) {
  if (n != vf.dim)
    throw DimensionMismatch("expected dimension " + std::to_string(vf.dim) + ", got " + std::to_string(n));
}

} // namespace

void VectorFieldSet::eval_drift(std::span<const double> x, std::span<double> out) const {
  if (drift_free) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  drift.value(x, out);
  assert(max_abs(out) <= drift.bound_value * (1.0 + 1e-12) && "drift exceeds its declared bound");
}

void VectorFieldSet::eval_diffusion(std::size_t i, std::span<const double> x, std::span<double> out) const {
  diffusion[i].value(x, out);
  assert(max_abs(out) <= diffusion[i].bound_value * (1.0 + 1e-12) && "diffusion exceeds its declared bound");
}

VectorField zero_field() {
  VectorField f;
  auto zero = [](std::span<const double>, std::span<double> out) { std::fill(out.begin(), out.end(), 0.0); };
  f.value = zero;
  f.jacobian = zero;
  f.hessian = zero;
  return f;
}

VectorFieldSet make_field_set(std::string_view id, std::size_t dim, double sigma) {
  if (dim == 0) throw std::invalid_argument("field set dimension must be at least 1");
  VectorFieldSet vf;
  vf.id = std::string(id);
  vf.dim = dim;
  vf.drift = zero_field();
  vf.drift_free = true;

  for (std::size_t i = 0; i < dim; ++i) {
    VectorField f;
    if (id == "const_sigma") {
      if (sigma == 0.0) throw std::invalid_argument("const_sigma needs sigma != 0");
      f.value = [=](std::span<const double>, std::span<double> out) {
        std::fill(out.begin(), out.end(), 0.0);
        out[i] = sigma;
      };
      auto zero = [](std::span<const double>, std::span<double> out) { std::fill(out.begin(), out.end(), 0.0); };
      f.jacobian = zero;
      f.hessian = zero;
      f.bound_value = std::abs(sigma);
      f.bound_below = std::abs(sigma);
    } else if (id == "two_plus_sin") {
      f = diagonal_field(
          dim, i, [](double x) { return 2.0 + std::sin(x); }, [](double x) { return std::cos(x); },
          [](double x) { return -std::sin(x); });
      f.bound_value = 3.0;
      f.bound_jacobian = 1.0;
      f.bound_hessian = 1.0;
      f.bound_below = 1.0;
    } else if (id == "tanh_elliptic") {
      f = diagonal_field(
          dim, i, [](double x) { return 1.5 + 0.5 * std::tanh(x); },
          [](double x) {
            const double s = 1.0 / std::cosh(x);
            return 0.5 * s * s;
          },
          [](double x) {
            const double s = 1.0 / std::cosh(x);
            return -std::tanh(x) * s * s;
          });
      f.bound_value = 2.0;
      f.bound_jacobian = 0.5;
      f.bound_hessian = 2.0 / (3.0 * std::sqrt(3.0));
      f.bound_below = 1.0;
    } else {
      throw std::invalid_argument("unknown vector field set: " + std::string(id));
    }
    vf.diffusion.push_back(std::move(f));
  }
  return vf;
}

std::function<double(double)> scalar_diffusion(const VectorFieldSet& vf) {
  if (vf.dim != 1) throw OracleUnavailable("scalar diffusion coefficient needs d = 1");
  auto value = vf.diffusion.at(0).value;
  return [value](double x) {
    double out = 0.0;
    value(std::span<const double>(&x, 1), std::span<double>(&out, 1));
    return out;
  };
}

std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::euler: return "euler";
    case Scheme::milstein_1d: return "milstein_1d";
    case Scheme::wong_zakai: return "wong_zakai";
  }
  return "euler";
}

Scheme parse_scheme(std::string_view s) {
  if (s == "euler") return Scheme::euler;
  if (s == "milstein_1d") return Scheme::milstein_1d;
  if (s == "wong_zakai") return Scheme::wong_zakai;
  throw std::invalid_argument("unknown scheme: " + std::string(s));
}

SolutionPath solve_sde(const VectorFieldSet& vf, std::span<const double> x0, const PathView& driver,
                       Scheme scheme, std::size_t substeps) {
  const std::size_t d = vf.dim;
  check_dim(vf, x0.size());
  check_dim(vf, driver.dim);
  if (vf.diffusion.size() != d) throw DimensionMismatch("field set must hold one diffusion field per dimension");
  if (scheme == Scheme::milstein_1d && d != 1) throw DimensionMismatch("milstein_1d requires d = 1");
  if (substeps == 0) throw std::invalid_argument("substeps must be at least 1");

  const std::size_t np = driver.grid.n_points();
  const double dt = driver.grid.step();
  SolutionPath out;
  out.grid = driver.grid;
  out.dim = d;
  out.x0.assign(x0.begin(), x0.end());
  out.values.assign(d * np, 0.0);
  out.scheme = scheme;
  out.substeps = scheme == Scheme::wong_zakai ? substeps : 1;

  std::vector<double> x(x0.begin(), x0.end());
  std::vector<double> db(d), v(d), f(d), jac(d * d);
  std::vector<double> k1(d), k2(d), k3(d), k4(d), tmp(d);

  // F(y) = V_0(y) dt + sum_i V_i(y) dB^i, the cell's ODE right-hand side.
  auto rhs = [&](std::span<const double> y, std::span<double> res) {
    if (vf.drift_free) {
      for (std::size_t j = 0; j < d; ++j) res[j] = 0.0;
    } else {
      vf.eval_drift(y, res);
      for (std::size_t j = 0; j < d; ++j) res[j] *= dt;
    }
    for (std::size_t i = 0; i < d; ++i) {
      vf.eval_diffusion(i, y, v);
      for (std::size_t j = 0; j < d; ++j) res[j] += v[j] * db[i];
    }
  };

  for (std::size_t i = 0; i < d; ++i) out.values[i * np] = x[i];
  for (std::size_t k = 0; k + 1 < np; ++k) {
    for (std::size_t i = 0; i < d; ++i) db[i] = driver.at(i, k + 1) - driver.at(i, k);

    switch (scheme) {
      case Scheme::euler:
        rhs(x, f);
        for (std::size_t j = 0; j < d; ++j) x[j] += f[j];
        break;
      case Scheme::milstein_1d: {
        rhs(x, f);
        vf.eval_diffusion(0, x, v);
        vf.diffusion[0].jacobian(x, jac);
        x[0] += f[0] + 0.5 * v[0] * jac[0] * db[0] * db[0];
        break;
      }
      case Scheme::wong_zakai: {
        const double hs = 1.0 / static_cast<double>(substeps);
        for (std::size_t s = 0; s < substeps; ++s) {
          rhs(x, k1);
          for (std::size_t j = 0; j < d; ++j) tmp[j] = x[j] + 0.5 * hs * k1[j];
          rhs(tmp, k2);
          for (std::size_t j = 0; j < d; ++j) tmp[j] = x[j] + 0.5 * hs * k2[j];
          rhs(tmp, k3);
          for (std::size_t j = 0; j < d; ++j) tmp[j] = x[j] + hs * k3[j];
          rhs(tmp, k4);
          for (std::size_t j = 0; j < d; ++j) x[j] += hs / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        break;
      }
    }

    for (std::size_t i = 0; i < d; ++i) {
      if (!std::isfinite(x[i]))
        throw BlowUpError("non-finite solver state at step " + std::to_string(k + 1), k + 1);
      out.values[i * np + k + 1] = x[i];
    }
  }
  return out;
}

SolutionPath solve_sde(const VectorFieldSet& vf, std::span<const double> x0, const FbmPath& driver,
                       Scheme scheme, std::size_t substeps) {
  SolutionPath out = solve_sde(vf, x0, PathView(driver), scheme, substeps);
  out.driver_seed = derive_seed(driver.seed, driver.replication);
  out.hurst = driver.hurst;
  out.field_id = vf.id;
  return out;
}

EllipticityReport check_ellipticity(const VectorFieldSet& vf,
                                    const std::vector<std::vector<double>>& sample_points, double threshold) {
  if (sample_points.empty()) throw std::invalid_argument("check_ellipticity needs at least one sample point");
  const std::size_t d = vf.dim;
  EllipticityReport r;
  r.threshold = threshold;
  r.min_singular_value = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd m(d, d);
  std::vector<double> v(d);
  for (std::size_t p = 0; p < sample_points.size(); ++p) {
    check_dim(vf, sample_points[p].size());
    for (std::size_t i = 0; i < d; ++i) {
      vf.eval_diffusion(i, sample_points[p], v);
      for (std::size_t j = 0; j < d; ++j) m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v[j];
    }
    const double s = Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues().minCoeff();
    if (s < r.min_singular_value) {
      r.min_singular_value = s;
      r.argmin = p;
    }
  }
  r.elliptic = r.min_singular_value > threshold;
  return r;
}

ConvergenceTable convergence_study(const VectorFieldSet& vf, double x0, HurstParameter h, Scheme scheme,
                                   std::vector<std::size_t> step_ladder, const ConvergenceOptions& opt) {
  if (vf.dim != 1) throw OracleUnavailable("scale-map oracle exists only in d = 1");
  if (!vf.drift_free) throw OracleUnavailable("scale-map oracle needs V_0 = 0");
  if (step_ladder.empty()) throw std::invalid_argument("empty step ladder");
  if (opt.n_paths == 0) throw std::invalid_argument("convergence study needs at least one path");
  const auto& v1 = vf.diffusion[0];
  if (!(v1.bound_below > 0.0)) throw OracleUnavailable("scale map needs a declared lower bound on |V_1|");

  std::sort(step_ladder.begin(), step_ladder.end());
  const std::size_t finest = step_ladder.back();
  for (std::size_t n : step_ladder)
    if (n == 0 || finest % n != 0) throw std::invalid_argument("each ladder entry must divide the finest one");

  const ScaleMap scale(scalar_diffusion(vf), v1.bound_below, v1.bound_value);
  const double s0 = scale(x0);
  const TimeGrid fine(0.0, opt.t_end, finest);
  const FbmSampler sampler(h, fine);

  ConvergenceTable table;
  table.n_paths = opt.n_paths;
  table.rows.resize(step_ladder.size());
  for (std::size_t r = 0; r < step_ladder.size(); ++r) {
    table.rows[r].n_steps = step_ladder[r];
    table.rows[r].step = opt.t_end / static_cast<double>(step_ladder[r]);
  }

  const double x0v[1] = {x0};
  table.per_path_errors.assign(opt.n_paths, std::vector<double>(step_ladder.size(), 0.0));
  for (std::size_t p = 0; p < opt.n_paths; ++p) {
    const FbmPath b = sampler.sample(1, opt.seed, p);
    std::vector<double> exact(fine.n_points());
    for (std::size_t k = 0; k < exact.size(); ++k) exact[k] = scale.inverse(s0 + b.values[k]);

    for (std::size_t r = 0; r < step_ladder.size(); ++r) {
      const std::size_t n = step_ladder[r];
      const std::size_t stride = finest / n;
      std::vector<double> coarse(n + 1);
      for (std::size_t k = 0; k <= n; ++k) coarse[k] = b.values[k * stride];
      const SolutionPath x = solve_sde(vf, x0v, PathView(TimeGrid(0.0, opt.t_end, n), 1, coarse), scheme,
                                       opt.substeps);
      double err = 0.0;
      for (std::size_t k = 0; k <= n; ++k) err = std::max(err, std::abs(x.values[k] - exact[k * stride]));
      table.per_path_errors[p][r] = err;
      table.rows[r].sup_error += err / static_cast<double>(opt.n_paths);
    }
  }

  bool positive = true;
  std::vector<double> ls, le;
  for (const auto& row : table.rows) {
    if (!(row.sup_error > 0.0)) positive = false;
    ls.push_back(std::log(row.step));
    le.push_back(std::log(row.sup_error));
  }
  table.fitted_order = positive && ls.size() >= 2 ? fit_line(ls, le).slope
                                                  : std::numeric_limits<double>::quiet_NaN();
  return table;
}

} // namespace fbmlt
