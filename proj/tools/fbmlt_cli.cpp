// fbmlt command-line driver.

#include "fbmlt/config.h"
#include "fbmlt/density.h"
#include "fbmlt/errors.h"
#include "fbmlt/experiment.h"
#include "fbmlt/fbm.h"
#include "fbmlt/holder.h"
#include "fbmlt/io.h"
#include "fbmlt/local_time.h"
#include "fbmlt/simulate.h"
#include "fbmlt/version.h"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace fbmlt;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::optional<std::string> out;
  std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, Common& c, bool config_required = false) {
  auto* opt = cmd->add_option("--config", c.config, "experiment config file");
  if (config_required) opt->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "master seed");
  cmd->add_option("--threads", c.threads, "worker threads");
  cmd->add_option("--out", c.out, "output directory");
  cmd->add_option("--set", c.sets, "override a config key (key=value), repeatable");
}

std::map<std::string, std::string> overrides_of(const Common& c) {
  std::map<std::string, std::string> o;
  for (const auto& s : c.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError({"--set expects key=value, got '" + s + "'"});
    o[s.substr(0, eq)] = s.substr(eq + 1);
  }
  if (c.seed) o["master_seed"] = std::to_string(*c.seed);
  if (c.threads) o["threads"] = std::to_string(*c.threads);
  if (c.out) o["output"] = *c.out;
  return o;
}

// Loads --config (if any), fills in `kind` when the file does not set it,
// and applies the flag overrides.
ExperimentConfig build_config(const Common& c, const std::string& default_kind) {
  std::map<std::string, std::string> entries;
  if (!c.config.empty()) entries = load_config(c.config).entries;
  if (!entries.count("kind")) entries["kind"] = default_kind;
  for (const auto& [k, v] : overrides_of(c)) entries[k] = v;
  std::string text;
  for (const auto& [k, v] : entries) text += k + " = " + v + "\n";
  return parse_config(text);
}

PathSource source_of(const ExperimentConfig& c) {
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

double epsilon_of(const ExperimentConfig& c) {
  return c.epsilon ? *c.epsilon : c.epsilon_mult * std::pow(c.T / static_cast<double>(c.n_steps), c.h);
}

LocalTimeField field_of(const ExperimentConfig& c, const PathView& view) {
  const double eps = epsilon_of(c);
  const double a = c.a_value();
  const auto tg = strided_t_grid(view, a, c.t_stride);
  const auto xg = covering_x_grid(view, a, view.grid.t_end(), eps, c.x_spacing * eps);
  return local_time_field(view, a, tg, xg, eps, parse_kernel(c.kernel));
}

void print_result(const ExperimentResult& r) {
  std::cout << to_string(r.config.kind) << (r.config.name.empty() ? "" : " " + r.config.name) << ": "
            << (r.pass ? "PASS" : "FAIL") << "  (" << std::fixed << std::setprecision(2) << r.wall_seconds << " s, digest "
            << r.digest << ")\n";
  std::cout << std::defaultfloat << std::setprecision(6);
  for (const auto& [k, v] : r.pooled) std::cout << "  " << k << " = " << v << '\n';
  for (const auto& ch : r.checks)
    std::cout << "  check " << ch.name << ": " << ch.value << ' ' << ch.op << ' ' << ch.threshold << " -> "
              << (ch.pass ? "ok" : "FAILED") << '\n';
}

int cmd_fbm(const Common& c) {
  const auto cfg = build_config(c, "fbm_validate");
  const fs::path dir = cfg.output;
  fs::create_directories(dir);
  const FbmSampler sampler(HurstParameter(cfg.h), TimeGrid(0.0, cfg.T, cfg.n_steps), parse_fbm_method(cfg.method));
  for (std::size_t r = 0; r < cfg.n_paths; ++r) {
    const auto p = sampler.sample(cfg.d, cfg.master_seed, r);
    const std::string stem = "fbm_" + std::to_string(r);
    write_path_csv(dir / (stem + ".csv"), PathView(p));
    write_fbm_binary(dir / (stem + ".bin"), p);
  }
  std::cout << "wrote " << cfg.n_paths << " fBm path(s) to " << dir.string() << '\n';
  return kExitPass;
}

int cmd_solve(const Common& c) {
  const auto cfg = build_config(c, "localtime_identity");
  const fs::path dir = cfg.output;
  fs::create_directories(dir);
  const PathSimulator sim(source_of(cfg));
  for (std::size_t r = 0; r < cfg.n_paths; ++r) {
    const auto x = sim.simulate(cfg.master_seed, r);
    const std::string stem = "solution_" + std::to_string(r);
    write_path_csv(dir / (stem + ".csv"), PathView(x));
    write_solution_binary(dir / (stem + ".bin"), x);
  }
  std::cout << "wrote " << cfg.n_paths << " solution path(s) to " << dir.string() << '\n';
  return kExitPass;
}

int cmd_localtime(const Common& c, const std::string& path_file) {
  const auto cfg = build_config(c, "localtime_identity");
  const fs::path dir = cfg.output;
  fs::create_directories(dir);
  const SolutionPath x = path_file.empty() ? PathSimulator(source_of(cfg)).simulate(cfg.master_seed, 0)
                                           : read_solution_binary(path_file);
  const auto field = field_of(cfg, PathView(x));
  write_field_csv(dir / "field.csv", field);
  write_field_binary(dir / "field.bin", field);
  const auto errs = occupation_identity_errors(field);
  double worst = 0.0;
  for (double e : errs) worst = std::max(worst, e);
  std::cout << "field " << field.n_t() << " x " << field.n_x() << ", epsilon " << field.epsilon
            << ", max occupation identity error " << worst << '\n';
  return worst < cfg.identity_tol ? kExitPass : kExitFail;
}

int cmd_holder(const Common& c, const std::string& field_file, const std::string& mode) {
  const auto cfg = build_config(c, "holder_time");
  const fs::path dir = cfg.output;
  fs::create_directories(dir);
  HolderOptions opt;
  opt.windows = parse_window_policy(cfg.window_policy);
  opt.n_windows = cfg.n_windows;
  opt.two_sided = cfg.two_sided;

  HolderEstimate est;
  if (mode == "path") {
    const auto x = PathSimulator(source_of(cfg)).simulate(cfg.master_seed, 0);
    est = estimate_path_holder(PathView(x), dyadic_ladder(cfg.n_steps, cfg.n_windows, cfg.min_lag), opt);
  } else {
    LocalTimeField field;
    if (!field_file.empty()) {
      field = read_field_binary(field_file);
    } else {
      const auto x = PathSimulator(source_of(cfg)).simulate(cfg.master_seed, 0);
      field = field_of(cfg, PathView(x));
    }
    if (mode == "time")
      est = estimate_holder_time(field, dyadic_ladder(field.n_t() - 1, cfg.n_windows, cfg.min_lag), opt);
    else
      est = estimate_holder_space(field, dyadic_ladder(field.n_x() - 1, cfg.n_windows, cfg.min_lag), opt);
  }
  append_holder_log(dir / "holder_log.csv", cfg.name.empty() ? mode : cfg.name, est);
  std::cout << holder_json(est, {cfg.master_seed}) << '\n';
  return kExitPass;
}

int cmd_modulus(const Common& c, double x, const std::vector<double>& distances, double bandwidth,
                std::size_t pairs) {
  const auto cfg = build_config(c, "existence");
  const fs::path dir = cfg.output;
  fs::create_directories(dir);
  ModulusOptions opt;
  opt.a = cfg.a_value();
  opt.bandwidth = bandwidth;
  opt.pairs_per_path = pairs;
  const auto rows = smoothed_density_modulus(source_of(cfg), x, distances,
                                             {cfg.n_paths, cfg.master_seed, cfg.threads}, opt);
  std::ofstream out(dir / "modulus.csv");
  out << std::setprecision(17) << "distance,x,y,v_x,v_y,difference,std_error\n";
  std::cout << "distance  |v(x)-v(y)|  stderr\n";
  for (const auto& r : rows) {
    out << r.distance << ',' << r.x << ',' << r.y << ',' << r.v_x << ',' << r.v_y << ',' << r.difference << ','
        << r.std_error << '\n';
    std::cout << std::setprecision(6) << r.distance << "  " << r.difference << "  " << r.std_error << '\n';
  }
  return kExitPass;
}

int cmd_run(const Common& c) {
  const auto cfg = build_config(c, "");
  const auto result = run_experiment(cfg);
  write_report(result, cfg.output);
  print_result(result);
  return result.pass ? kExitPass : kExitFail;
}

int cmd_replay(const std::string& report, const Common& c) {
  std::map<std::string, std::string> o;
  if (c.threads) o["threads"] = std::to_string(*c.threads);
  if (c.out) o["output"] = *c.out;
  if (c.seed || !c.sets.empty() || !c.config.empty())
    throw ConfigError({"replay: configs are immutable; only --threads and --out are accepted"});
  const auto rr = replay(report, o);
  if (c.out) write_report(rr.result, *c.out);
  print_result(rr.result);
  std::cout << "recorded digest " << rr.recorded_digest << ", replay " << (rr.identical ? "identical" : "DIFFERS")
            << '\n';
  return rr.identical && rr.result.pass ? kExitPass : kExitFail;
}

int cmd_suite(const std::string& manifest, const Common& c) {
  std::map<std::string, std::string> o;
  if (c.threads) o["threads"] = std::to_string(*c.threads);
  if (c.seed) o["master_seed"] = std::to_string(*c.seed);
  const fs::path out = c.out ? fs::path(*c.out) : fs::path("suite_out");
  const auto suite = run_suite(manifest, out, o);
  for (const auto& r : suite.rows)
    std::cout << std::left << std::setw(8) << r.status << ' ' << r.name
              << (r.message.empty() ? "" : "  (" + r.message + ")") << '\n';
  std::cout << suite.rows.size() << " config(s), summary in " << (out / "summary.csv").string() << '\n';
  return suite.all_pass ? kExitPass : kExitFail;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"fBm-driven SDE simulation, local times and regularity experiments"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  Common common;

  auto* fbm = app.add_subcommand("fbm", "sample fBm paths (CSV and binary)");
  add_common(fbm, common);

  auto* solve = app.add_subcommand("solve", "simulate SDE solution paths");
  add_common(solve, common);

  std::string path_file;
  auto* lt = app.add_subcommand("localtime", "local-time field of one path");
  add_common(lt, common);
  lt->add_option("--path", path_file, "solution path binary (simulated from the config when absent)")
      ->check(CLI::ExistingFile);

  std::string field_file, holder_mode = "time";
  auto* holder = app.add_subcommand("holder", "Holder exponent of a field or path");
  add_common(holder, common);
  holder->add_option("--field", field_file, "field binary from `localtime`")->check(CLI::ExistingFile);
  holder->add_option("--mode", holder_mode, "time, space or path")
      ->check(CLI::IsMember({"time", "space", "path"}));

  std::string density_mode = "scaling";
  double mod_x = 0.0, mod_bw = 0.05;
  std::size_t mod_pairs = 32;
  std::vector<double> mod_distances{0.0, 0.05, 0.1, 0.2, 0.4, 0.8};
  auto* density = app.add_subcommand("density", "increment density experiments and the modulus table");
  add_common(density, common);
  density->add_option("--mode", density_mode, "scaling, tail, existence or modulus")
      ->check(CLI::IsMember({"scaling", "tail", "existence", "modulus"}));
  density->add_option("--x", mod_x, "modulus: base point");
  density->add_option("--distances", mod_distances, "modulus: |x - y| ladder")->delimiter(',');
  density->add_option("--bandwidth", mod_bw, "modulus: kernel bandwidth");
  density->add_option("--pairs", mod_pairs, "modulus: (S, U) pairs per path");

  auto* run = app.add_subcommand("run", "run one experiment and write its report");
  add_common(run, common, true);

  std::string report_file;
  auto* rep = app.add_subcommand("replay", "re-run a report and compare per-path records");
  rep->add_option("report", report_file, "report.json")->required()->check(CLI::ExistingFile);
  add_common(rep, common);

  std::string manifest;
  auto* suite = app.add_subcommand("suite", "run every config listed in a manifest");
  suite->add_option("manifest", manifest, "manifest file")->required()->check(CLI::ExistingFile);
  add_common(suite, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitUsage;
  }

  try {
    if (*fbm) return cmd_fbm(common);
    if (*solve) return cmd_solve(common);
    if (*lt) return cmd_localtime(common, path_file);
    if (*holder) return cmd_holder(common, field_file, holder_mode);
    if (*density) {
      if (density_mode == "modulus") return cmd_modulus(common, mod_x, mod_distances, mod_bw, mod_pairs);
      const std::string kind =
          density_mode == "scaling" ? "density_scaling" : density_mode == "tail" ? "tail_check" : "existence";
      Common c = common;
      c.sets.push_back("kind=" + kind);
      return cmd_run(c);
    }
    if (*run) return cmd_run(common);
    if (*rep) return cmd_replay(report_file, common);
    if (*suite) return cmd_suite(manifest, common);
  } catch (const ConfigError& e) {
    std::cerr << "config error:\n";
    for (const auto& issue : e.issues()) std::cerr << "  " << issue << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFail;
  }
  return kExitUsage;
}
