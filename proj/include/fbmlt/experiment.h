#pragma once

#include "fbmlt/config.h"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace fbmlt {

/// A module error raised while processing one replication.
class ReplicationError : public std::runtime_error {
 public:
  ReplicationError(const std::string& what, std::uint64_t replication)
      : std::runtime_error("replication " + std::to_string(replication) + ": " + what), replication_(replication) {}
  std::uint64_t replication() const noexcept { return replication_; }

 private:
  std::uint64_t replication_;
};

/// One row per replication; the first column is always "replication".
struct PerPathTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

/// value <op> threshold, with op one of "<=", ">=", "<", "==".
struct Check {
  std::string name;
  double value = 0.0;
  std::string op;
  double threshold = 0.0;
  bool pass = false;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<std::uint64_t> seeds;  // derive_seed(master_seed, r)
  PerPathTable per_path;
  std::map<std::string, double> pooled;
  std::vector<Check> checks;
  bool pass = false;
  double wall_seconds = 0.0;
  std::string version;
  std::string digest;  // FNV-1a over the per-path table
  std::vector<std::string> notes;
};

/// 64-bit FNV-1a over the column names and the bit patterns of every value,
/// as 16 hex digits.
std::string per_path_digest(const PerPathTable& table);

/// Dispatches to the pipeline for cfg.kind. Does not write files.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Writes report.json, per_path.csv and summary.csv into dir.
void write_report(const ExperimentResult& result, const std::filesystem::path& dir);

struct ReplayResult {
  ExperimentResult result;
  std::string recorded_digest;
  std::string recorded_version;
  bool identical = false;
};

/// Re-runs the config and seeds embedded in a report.json. Only threads and
/// output may be overridden (ConfigError otherwise). A version mismatch is
/// reported on std::clog and still replayed. Malformed reports raise
/// CorruptFileError.
ReplayResult replay(const std::filesystem::path& report,
                    const std::map<std::string, std::string>& overrides = {});

struct SuiteRow {
  std::string config;
  std::string name;
  std::string status;  // pass | fail | invalid | error
  std::string message;
  std::string digest;
  double wall_seconds = 0.0;
};

struct SuiteResult {
  std::vector<SuiteRow> rows;
  bool all_pass = true;
};

/// Manifest: one config path per line (relative to the manifest), '#'
/// comments. Each config runs in turn and writes into out_dir/<name>. A
/// config that fails validation becomes an "invalid" row; the rest still
/// run. summary.csv is written into out_dir.
SuiteResult run_suite(const std::filesystem::path& manifest, const std::filesystem::path& out_dir,
                      const std::map<std::string, std::string>& overrides = {});

} // namespace fbmlt
