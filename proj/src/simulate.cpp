#include "fbmlt/simulate.h"
#include "fbmlt/errors.h"
#include "fbmlt/rng.h"

#include <stdexcept>
#include <string>

namespace fbmlt {

std::string_view to_string(DriverKind k) { return k == DriverKind::linear ? "linear" : "fbm"; }

DriverKind parse_driver(std::string_view s) {
  if (s == "fbm") return DriverKind::fbm;
  if (s == "linear") return DriverKind::linear;
  throw std::invalid_argument("unknown driver: " + std::string(s));
}

PathSimulator::PathSimulator(PathSource source) : source_(std::move(source)) {
  if (source_.x0.size() != source_.fields.dim) throw DimensionMismatch("x0 dimension differs from the field set's");
  if (source_.driver == DriverKind::fbm)
    sampler_.emplace(HurstParameter(source_.hurst), source_.grid, source_.method);
}

SolutionPath PathSimulator::simulate(std::uint64_t seed, std::uint64_t replication) const {
  const std::size_t d = source_.fields.dim;
  if (source_.driver == DriverKind::linear) {
    const TimeGrid& g = source_.grid;
    std::vector<double> b(d * g.n_points());
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t k = 0; k < g.n_points(); ++k) b[i * g.n_points() + k] = g.time(k) - g.t_start();
    SolutionPath x = solve_sde(source_.fields, source_.x0, PathView(g, d, b), source_.scheme, source_.substeps);
    x.driver_seed = derive_seed(seed, replication);
    x.hurst = source_.hurst;
    x.field_id = source_.fields.id;
    return x;
  }
  const FbmPath b = sampler_->sample(d, seed, replication);
  return solve_sde(source_.fields, source_.x0, b, source_.scheme, source_.substeps);
}

} // namespace fbmlt
