#pragma once

#include "fbmlt/fbm.h"
#include "fbmlt/grid.h"
#include "fbmlt/path.h"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fbmlt {

/// A smooth map R^d -> R^d with derivative evaluators.
///   value(x, out):    out[i] = V^i(x)
///   jacobian(x, out): out[i*d + j] = dV^i/dx_j
///   hessian(x, out):  out[(i*d + j)*d + k] = d2V^i/dx_j dx_k
/// The bounds are sup-norm bounds declared by whoever builds the field.
struct VectorField {
  using Eval = std::function<void(std::span<const double>, std::span<double>)>;
  Eval value;
  Eval jacobian;
  Eval hessian;
  double bound_value = 0.0;
  double bound_jacobian = 0.0;
  double bound_hessian = 0.0;
  /// Declared lower bound on |V|, 0 when none is claimed.
  double bound_below = 0.0;
};

/// Drift V_0 followed by the diffusion fields V_1..V_d.
struct VectorFieldSet {
  std::string id;
  std::size_t dim = 1;
  VectorField drift;
  std::vector<VectorField> diffusion;
  bool drift_free = true;  // V_0 == 0 identically

  void eval_drift(std::span<const double> x, std::span<double> out) const;
  void eval_diffusion(std::size_t i, std::span<const double> x, std::span<double> out) const;
};

VectorField zero_field();

/// Built-in sets, all with V_0 = 0:
///   const_sigma    V_i = sigma * e_i
///   two_plus_sin   V_i = (2 + sin x_i) e_i
///   tanh_elliptic  V_i = (1.5 + 0.5 tanh x_i) e_i
VectorFieldSet make_field_set(std::string_view id, std::size_t dim, double sigma = 1.0);

/// The 1-d diffusion coefficient of a built-in set as a scalar function;
/// used by the scale-map oracle.
std::function<double(double)> scalar_diffusion(const VectorFieldSet& vf);

enum class Scheme { euler, milstein_1d, wong_zakai };

std::string_view to_string(Scheme s);
Scheme parse_scheme(std::string_view s);

struct SolutionPath {
  TimeGrid grid{0.0, 1.0, 1};
  std::size_t dim = 1;
  std::vector<double> x0;
  std::vector<double> values;  // component-major, n_points per component
  Scheme scheme = Scheme::euler;
  std::size_t substeps = 1;
  std::uint64_t driver_seed = 0;
  double hurst = 0.5;
  std::string field_id;

  std::span<const double> component(std::size_t i) const {
    return {values.data() + i * grid.n_points(), grid.n_points()};
  }
  double at(std::size_t i, std::size_t k) const { return values[i * grid.n_points() + k]; }
};

inline constexpr std::size_t kDefaultSubsteps = 8;

/// Stratonovich-type solution on the driver's grid. wong_zakai integrates
/// the ODE driven by the piecewise-linear interpolation of the driver with
/// `substeps` classical RK4 steps per cell; the other schemes ignore it.
SolutionPath solve_sde(const VectorFieldSet& vf, std::span<const double> x0, const PathView& driver,
                       Scheme scheme, std::size_t substeps = kDefaultSubsteps);
SolutionPath solve_sde(const VectorFieldSet& vf, std::span<const double> x0, const FbmPath& driver,
                       Scheme scheme, std::size_t substeps = kDefaultSubsteps);

struct EllipticityReport {
  double min_singular_value = 0.0;
  std::size_t argmin = 0;
  double threshold = 0.0;
  bool elliptic = false;
};

/// Smallest singular value of [V_1 ... V_d] over the sample points.
EllipticityReport check_ellipticity(const VectorFieldSet& vf,
                                    const std::vector<std::vector<double>>& sample_points,
                                    double threshold = 1e-8);

struct ConvergenceRow {
  std::size_t n_steps = 0;
  double step = 0.0;
  double sup_error = 0.0;  // mean over paths of max_k |X_k - oracle_k|
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  double fitted_order = 0.0;  // slope of log error on log step; NaN if any error is 0
  std::size_t n_paths = 0;
  std::vector<std::vector<double>> per_path_errors;  // [path][rung]
};

struct ConvergenceOptions {
  double t_end = 1.0;
  std::size_t n_paths = 8;
  std::uint64_t seed = 1;
  std::size_t substeps = kDefaultSubsteps;
};

/// Drivers are sampled once at the finest n_steps of the ladder and
/// subsampled for the coarser rungs, so every rung sees the same Brownian
/// path. The reference is the scale-map closed form; d > 1 or a nonzero
/// drift raise OracleUnavailable. Every ladder entry must divide the largest.
ConvergenceTable convergence_study(const VectorFieldSet& vf, double x0, HurstParameter h, Scheme scheme,
                                   std::vector<std::size_t> step_ladder, const ConvergenceOptions& opt = {});

} // namespace fbmlt
