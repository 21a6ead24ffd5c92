#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fbmlt {

enum class ExperimentKind {
  fbm_validate,
  sde_converge,
  localtime_identity,
  holder_time,
  holder_space,
  density_scaling,
  tail_check,
  existence,
};

std::string_view to_string(ExperimentKind k);
ExperimentKind parse_kind(std::string_view s);

/// Parsed experiment description. The grammar is documented in
/// docs/config.md; every field has a default except kind.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::fbm_validate;
  std::string name;

  // model
  double h = 0.3;
  std::size_t d = 1;
  std::string field = "const_sigma";
  double sigma = 1.0;
  std::vector<double> x0{0.0};
  std::string driver = "fbm";
  std::string method = "davies_harte";
  std::string scheme = "wong_zakai";
  std::size_t substeps = 8;

  // grid and run
  double T = 1.0;
  std::optional<double> a;  // default 0.1 T
  std::size_t n_steps = 1024;
  std::size_t n_paths = 20;
  std::uint64_t master_seed = 1;
  std::size_t threads = 1;
  std::string output = "out";

  // local time and Hölder
  std::optional<double> epsilon;  // default 4 step^h
  double epsilon_mult = 4.0;
  std::vector<double> eps_ladder;
  std::size_t t_stride = 8;
  double x_spacing = 0.25;  // x-grid spacing as a fraction of epsilon
  std::string kernel = "indicator";
  std::size_t n_windows = 8;
  std::size_t min_lag = 8;
  std::string window_policy = "fixed_windows";
  bool two_sided = false;
  std::string source = "sde";  // sde | planted
  double beta = 0.5;
  bool check_inequality = false;
  double inequality_tol = 0.05;
  double identity_tol = 1e-2;

  // fbm_validate
  std::string fbm_check = "covariance";  // covariance | path_holder
  double z_max = 5.0;

  // sde_converge
  std::vector<std::size_t> step_ladder;
  double max_final_error = 1e-2;
  double monotone_slack = 0.1;

  // density
  std::size_t s_step = 0;
  std::vector<std::size_t> gap_steps;
  std::optional<double> gamma;  // default 0.8 h
  std::vector<double> thresholds;
  double tail_margin = 0.1;
  std::optional<double> u;
  std::vector<double> interval;  // default [a, T]
  std::string expect = "bounded";  // bounded | divergent
  std::optional<double> expect_value;
  double value_tol = 1e-9;
  bool divergence_diagnostic = false;

  // acceptance
  std::optional<double> target;
  double tolerance = 0.1;
  double stderr_mult = 0.0;
  std::optional<double> lower;
  std::optional<double> upper;

  /// Keys as written in the source text, for echo and replay.
  std::map<std::string, std::string> entries;

  double a_value() const { return a ? *a : 0.1 * T; }
};

/// Parses `key = value` lines. '#' starts a comment. Unknown keys,
/// duplicate keys, malformed values and gate violations are all collected
/// into one ConfigError.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& file);

/// Re-parses cfg.entries with some keys replaced (used for CLI overrides).
ExperimentConfig with_overrides(const ExperimentConfig& cfg, const std::map<std::string, std::string>& overrides);

/// Canonical text: one `key = value` line per entry, sorted by key.
std::string to_text(const ExperimentConfig& cfg);

/// All recognised keys.
const std::vector<std::string>& config_keys();

} // namespace fbmlt
