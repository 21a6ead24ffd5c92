#pragma once

#include "fbmlt/fbm.h"
#include "fbmlt/sde.h"

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace fbmlt {

/// fbm: fractional Brownian driver. linear: B^i_t = t - t_start in every
/// component, a deterministic control.
enum class DriverKind { fbm, linear };

std::string_view to_string(DriverKind k);
DriverKind parse_driver(std::string_view s);

/// Everything needed to produce replication r of a solution path.
struct PathSource {
  VectorFieldSet fields;
  double hurst = 0.5;
  std::vector<double> x0;
  TimeGrid grid{0.0, 1.0, 1024};
  Scheme scheme = Scheme::wong_zakai;
  std::size_t substeps = kDefaultSubsteps;
  FbmMethod method = FbmMethod::davies_harte;
  DriverKind driver = DriverKind::fbm;
};

/// Holds the sampler so that many replications share one factorization.
/// Safe to call simulate() concurrently.
class PathSimulator {
 public:
  explicit PathSimulator(PathSource source);

  SolutionPath simulate(std::uint64_t seed, std::uint64_t replication) const;
  const PathSource& source() const noexcept { return source_; }

 private:
  PathSource source_;
  std::optional<FbmSampler> sampler_;
};

} // namespace fbmlt
