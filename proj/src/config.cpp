#include "fbmlt/config.h"
#include "fbmlt/errors.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace fbmlt {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& v) {
  double out = 0.0;
  const char* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end) throw std::invalid_argument("expected a number, got '" + v + "'");
  return out;
}

std::uint64_t to_u64(const std::string& v) {
  std::uint64_t out = 0;
  const char* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end) throw std::invalid_argument("expected a nonnegative integer, got '" + v + "'");
  return out;
}

bool to_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument("expected true or false, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw std::invalid_argument("empty list element in '" + v + "'");
    out.push_back(item);
  }
  return out;
}

std::vector<double> to_doubles(const std::string& v) {
  std::vector<double> out;
  for (const auto& s : split_list(v)) out.push_back(to_double(s));
  return out;
}

std::vector<std::size_t> to_sizes(const std::string& v) {
  std::vector<std::size_t> out;
  for (const auto& s : split_list(v)) out.push_back(static_cast<std::size_t>(to_u64(s)));
  return out;
}

std::string one_of(const std::string& v, std::initializer_list<const char*> allowed) {
  for (const char* a : allowed)
    if (v == a) return v;
  std::string msg = "expected one of";
  for (const char* a : allowed) msg += std::string(" ") + a;
  throw std::invalid_argument(msg + ", got '" + v + "'");
}

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"kind", [](auto& c, const auto& v) { c.kind = parse_kind(v); }},
      {"name", [](auto& c, const auto& v) { c.name = v; }},
      {"h", [](auto& c, const auto& v) { c.h = to_double(v); }},
      {"d", [](auto& c, const auto& v) { c.d = to_u64(v); }},
      {"field", [](auto& c, const auto& v) {
         c.field = one_of(v, {"const_sigma", "two_plus_sin", "tanh_elliptic"});
       }},
      {"sigma", [](auto& c, const auto& v) { c.sigma = to_double(v); }},
      {"x0", [](auto& c, const auto& v) { c.x0 = to_doubles(v); }},
      {"driver", [](auto& c, const auto& v) { c.driver = one_of(v, {"fbm", "linear"}); }},
      {"method", [](auto& c, const auto& v) { c.method = one_of(v, {"davies_harte", "cholesky"}); }},
      {"scheme", [](auto& c, const auto& v) { c.scheme = one_of(v, {"euler", "milstein_1d", "wong_zakai"}); }},
      {"substeps", [](auto& c, const auto& v) { c.substeps = to_u64(v); }},
      {"T", [](auto& c, const auto& v) { c.T = to_double(v); }},
      {"a", [](auto& c, const auto& v) { c.a = to_double(v); }},
      {"n_steps", [](auto& c, const auto& v) { c.n_steps = to_u64(v); }},
      {"n_paths", [](auto& c, const auto& v) { c.n_paths = to_u64(v); }},
      {"master_seed", [](auto& c, const auto& v) { c.master_seed = to_u64(v); }},
      {"threads", [](auto& c, const auto& v) { c.threads = to_u64(v); }},
      {"output", [](auto& c, const auto& v) { c.output = v; }},
      {"epsilon", [](auto& c, const auto& v) {
         if (v == "auto") c.epsilon.reset();
         else c.epsilon = to_double(v);
       }},
      {"epsilon_mult", [](auto& c, const auto& v) { c.epsilon_mult = to_double(v); }},
      {"eps_ladder", [](auto& c, const auto& v) { c.eps_ladder = to_doubles(v); }},
      {"t_stride", [](auto& c, const auto& v) { c.t_stride = to_u64(v); }},
      {"x_spacing", [](auto& c, const auto& v) { c.x_spacing = to_double(v); }},
      {"kernel", [](auto& c, const auto& v) { c.kernel = one_of(v, {"indicator", "epanechnikov"}); }},
      {"n_windows", [](auto& c, const auto& v) { c.n_windows = to_u64(v); }},
      {"min_lag", [](auto& c, const auto& v) { c.min_lag = to_u64(v); }},
      {"window_policy", [](auto& c, const auto& v) { c.window_policy = one_of(v, {"fixed_windows", "sliding"}); }},
      {"two_sided", [](auto& c, const auto& v) { c.two_sided = to_bool(v); }},
      {"source", [](auto& c, const auto& v) { c.source = one_of(v, {"sde", "planted"}); }},
      {"beta", [](auto& c, const auto& v) { c.beta = to_double(v); }},
      {"check_inequality", [](auto& c, const auto& v) { c.check_inequality = to_bool(v); }},
      {"inequality_tol", [](auto& c, const auto& v) { c.inequality_tol = to_double(v); }},
      {"identity_tol", [](auto& c, const auto& v) { c.identity_tol = to_double(v); }},
      {"fbm_check", [](auto& c, const auto& v) { c.fbm_check = one_of(v, {"covariance", "path_holder"}); }},
      {"z_max", [](auto& c, const auto& v) { c.z_max = to_double(v); }},
      {"step_ladder", [](auto& c, const auto& v) { c.step_ladder = to_sizes(v); }},
      {"max_final_error", [](auto& c, const auto& v) { c.max_final_error = to_double(v); }},
      {"monotone_slack", [](auto& c, const auto& v) { c.monotone_slack = to_double(v); }},
      {"s_step", [](auto& c, const auto& v) { c.s_step = to_u64(v); }},
      {"gap_steps", [](auto& c, const auto& v) { c.gap_steps = to_sizes(v); }},
      {"gamma", [](auto& c, const auto& v) { c.gamma = to_double(v); }},
      {"thresholds", [](auto& c, const auto& v) { c.thresholds = to_doubles(v); }},
      {"tail_margin", [](auto& c, const auto& v) { c.tail_margin = to_double(v); }},
      {"u", [](auto& c, const auto& v) { c.u = to_double(v); }},
      {"interval", [](auto& c, const auto& v) { c.interval = to_doubles(v); }},
      {"expect", [](auto& c, const auto& v) { c.expect = one_of(v, {"bounded", "divergent"}); }},
      {"expect_value", [](auto& c, const auto& v) { c.expect_value = to_double(v); }},
      {"value_tol", [](auto& c, const auto& v) { c.value_tol = to_double(v); }},
      {"divergence_diagnostic", [](auto& c, const auto& v) { c.divergence_diagnostic = to_bool(v); }},
      {"target", [](auto& c, const auto& v) { c.target = to_double(v); }},
      {"tolerance", [](auto& c, const auto& v) { c.tolerance = to_double(v); }},
      {"stderr_mult", [](auto& c, const auto& v) { c.stderr_mult = to_double(v); }},
      {"lower", [](auto& c, const auto& v) { c.lower = to_double(v); }},
      {"upper", [](auto& c, const auto& v) { c.upper = to_double(v); }},
  };
  return table;
}

void validate(ExperimentConfig& c, std::vector<std::string>& issues) {
  auto bad = [&](const std::string& key, const std::string& msg) { issues.push_back(key + ": " + msg); };

  if (!(c.h > 0.0 && c.h < 1.0)) bad("h", "must lie in (0, 1)");
  if (c.d == 0) bad("d", "must be at least 1");
  if (!(c.T > 0.0)) bad("T", "must be positive");
  if (c.a && !(*c.a > 0.0 && *c.a < c.T)) bad("a", "must lie in (0, T)");
  if (c.n_steps == 0) bad("n_steps", "must be positive");
  if (c.n_paths == 0) bad("n_paths", "must be positive");
  if (c.threads == 0) bad("threads", "must be positive");
  if (c.substeps == 0) bad("substeps", "must be positive");
  if (c.sigma == 0.0) bad("sigma", "must be nonzero");
  if (c.x0.size() == 1 && c.d > 1) c.x0.assign(c.d, c.x0[0]);
  if (c.x0.size() != c.d) bad("x0", "needs 1 or d values");
  if (c.scheme == "milstein_1d" && c.d != 1) bad("scheme", "milstein_1d requires d = 1");
  if (c.epsilon && !(*c.epsilon > 0.0)) bad("epsilon", "must be positive");
  if (!(c.epsilon_mult > 0.0)) bad("epsilon_mult", "must be positive");
  if (c.t_stride == 0) bad("t_stride", "must be positive");
  if (!(c.x_spacing > 0.0 && c.x_spacing <= 1.0)) bad("x_spacing", "must lie in (0, 1]");
  if (c.n_windows == 0) bad("n_windows", "must be positive");
  if (c.min_lag == 0) bad("min_lag", "must be positive");
  if (!(c.beta > 0.0 && c.beta < 1.0)) bad("beta", "must lie in (0, 1)");

  const bool holder = c.kind == ExperimentKind::holder_time || c.kind == ExperimentKind::holder_space;
  if (holder) {
    if (c.d != 1) bad("d", "Holder experiments need d = 1");
    if (c.source == "sde" && !(c.h > 0.25 && c.h < 0.5))
      bad("h", "Holder experiments on simulated paths need 1/4 < h < 1/2");
  }
  const bool needs_lt = c.kind == ExperimentKind::localtime_identity || c.kind == ExperimentKind::existence;
  if (needs_lt && !(static_cast<double>(c.d) * c.h < 1.0) && !c.divergence_diagnostic)
    bad("h", "local-time experiments need d*h < 1 (set divergence_diagnostic = true to override)");
  if (c.kind == ExperimentKind::localtime_identity && c.d != 1)
    bad("d", "local-time fields are one-dimensional");

  switch (c.kind) {
    case ExperimentKind::sde_converge:
      if (c.step_ladder.size() < 2) bad("step_ladder", "needs at least two resolutions");
      if (c.d != 1) bad("d", "the scale-map oracle needs d = 1");
      break;
    case ExperimentKind::density_scaling:
      if (c.d != 1) bad("d", "density scaling needs d = 1");
      if (c.s_step == 0) bad("s_step", "must be positive (s > 0)");
      if (c.gap_steps.size() < 2) bad("gap_steps", "needs at least two gaps");
      break;
    case ExperimentKind::tail_check:
      if (c.d != 1) bad("d", "tail checks need d = 1");
      if (c.s_step == 0) bad("s_step", "must be positive (s > 0)");
      if (c.gap_steps.size() != 1) bad("gap_steps", "needs exactly one gap");
      if (c.gamma && !(*c.gamma > 0.0 && *c.gamma < c.h)) bad("gamma", "must lie in (0, h)");
      break;
    case ExperimentKind::existence:
      if (!c.u) bad("u", "is required");
      else if (!(*c.u >= 0.0 && *c.u <= c.T)) bad("u", "must lie in [0, T]");
      if (c.eps_ladder.size() < 2) bad("eps_ladder", "needs at least two radii");
      if (!c.interval.empty() && (c.interval.size() != 2 || !(c.interval[0] < c.interval[1])))
        bad("interval", "needs two increasing times");
      break;
    default:
      break;
  }
  for (std::size_t i = 1; i < c.eps_ladder.size(); ++i)
    if (!(c.eps_ladder[i] < c.eps_ladder[i - 1])) {
      bad("eps_ladder", "must be strictly decreasing");
      break;
    }
  for (double e : c.eps_ladder)
    if (!(e > 0.0)) {
      bad("eps_ladder", "entries must be positive");
      break;
    }
}

ExperimentConfig from_entries(const std::map<std::string, std::string>& entries, std::vector<std::string>& issues) {
  ExperimentConfig c;
  if (!entries.count("kind")) issues.push_back("kind: is required");
  for (const auto& [key, value] : entries) {
    auto it = setters().find(key);
    if (it == setters().end()) {
      issues.push_back(key + ": unknown key");
      continue;
    }
    try {
      it->second(c, value);
    } catch (const std::exception& e) {
      issues.push_back(key + ": " + e.what());
    }
  }
  c.entries = entries;
  validate(c, issues);
  return c;
}

} // namespace

std::string_view to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::fbm_validate: return "fbm_validate";
    case ExperimentKind::sde_converge: return "sde_converge";
    case ExperimentKind::localtime_identity: return "localtime_identity";
    case ExperimentKind::holder_time: return "holder_time";
    case ExperimentKind::holder_space: return "holder_space";
    case ExperimentKind::density_scaling: return "density_scaling";
    case ExperimentKind::tail_check: return "tail_check";
    case ExperimentKind::existence: return "existence";
  }
  return "fbm_validate";
}

ExperimentKind parse_kind(std::string_view s) {
  for (auto k : {ExperimentKind::fbm_validate, ExperimentKind::sde_converge, ExperimentKind::localtime_identity,
                 ExperimentKind::holder_time, ExperimentKind::holder_space, ExperimentKind::density_scaling,
                 ExperimentKind::tail_check, ExperimentKind::existence})
    if (to_string(k) == s) return k;
  throw std::invalid_argument("unknown experiment kind '" + std::string(s) + "'");
}

ExperimentConfig parse_config(std::string_view text) {
  std::map<std::string, std::string> entries;
  std::vector<std::string> issues;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      issues.push_back("line " + std::to_string(lineno) + ": expected 'key = value'");
      continue;
    }
    const std::string key = trim(std::string_view(t).substr(0, eq));
    const std::string value = trim(std::string_view(t).substr(eq + 1));
    if (key.empty() || value.empty()) {
      issues.push_back("line " + std::to_string(lineno) + ": empty key or value");
      continue;
    }
    if (!entries.emplace(key, value).second) issues.push_back(key + ": duplicate key (line " + std::to_string(lineno) + ")");
  }
  ExperimentConfig c = from_entries(entries, issues);
  if (!issues.empty()) throw ConfigError(std::move(issues));
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError({"cannot read config file " + file.string()});
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

ExperimentConfig with_overrides(const ExperimentConfig& cfg, const std::map<std::string, std::string>& overrides) {
  auto entries = cfg.entries;
  for (const auto& [k, v] : overrides) entries[k] = v;
  std::vector<std::string> issues;
  ExperimentConfig c = from_entries(entries, issues);
  if (!issues.empty()) throw ConfigError(std::move(issues));
  return c;
}

std::string to_text(const ExperimentConfig& cfg) {
  std::string out;
  for (const auto& [k, v] : cfg.entries) out += k + " = " + v + "\n";
  return out;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [key, _] : setters()) k.push_back(key);
    return k;
  }();
  return keys;
}

} // namespace fbmlt
