#pragma once

#include "fbmlt/fbm.h"
#include "fbmlt/holder.h"
#include "fbmlt/local_time.h"
#include "fbmlt/sde.h"

#include <filesystem>
#include <string>
#include <vector>

namespace fbmlt {

/// Columns t, component_0, ..., component_{d-1}; full double precision.
void write_path_csv(const std::filesystem::path& file, const PathView& path);

/// Binary layout, little-endian:
///   char[8]  magic "FBMPATH1"
///   u32      format version (1)
///   u32      kind (0 = fBm, 1 = SDE solution)
///   f64      h
///   u64      seed (driver seed for solutions)
///   u64      replication (0 for solutions)
///   u32      method (fBm) or scheme (solution)
///   u32      substeps
///   f64 f64  t_start, t_end
///   u64      n_steps
///   u64      dim
///   f64[dim] x0 (zeros for fBm)
///   f64[dim * (n_steps + 1)] values, component-major
void write_fbm_binary(const std::filesystem::path& file, const FbmPath& path);
void write_solution_binary(const std::filesystem::path& file, const SolutionPath& path);
FbmPath read_fbm_binary(const std::filesystem::path& file);
SolutionPath read_solution_binary(const std::filesystem::path& file);

/// Long format: t, x, value.
void write_field_csv(const std::filesystem::path& file, const LocalTimeField& field);

/// Binary layout, little-endian:
///   char[8] "FBMLTFLD", u32 version, u32 kernel, f64 a, f64 epsilon,
///   f64 ball_constant, u64 n_t, u64 n_x, f64[n_t] t_grid, f64[n_x] x_grid,
///   f64[n_t * n_x] values (row per t)
void write_field_binary(const std::filesystem::path& file, const LocalTimeField& field);
LocalTimeField read_field_binary(const std::filesystem::path& file);

/// JSON record: exponent, stderr, r2, ladder, mode, seeds.
std::string holder_json(const HolderEstimate& est, const std::vector<std::uint64_t>& seeds);

/// Appends one row to a CSV log, writing the header when the file is new.
void append_holder_log(const std::filesystem::path& file, const std::string& label, const HolderEstimate& est);

} // namespace fbmlt
