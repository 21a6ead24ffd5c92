// Runs the acceptance manifest, then replays every report single-threaded
// and prints one PASS/FAIL line per criterion. Exit status is nonzero when
// any criterion fails.

#include "fbmlt/config.h"
#include "fbmlt/errors.h"
#include "fbmlt/experiment.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace fbmlt;

namespace {

struct Run {
  ExperimentResult result;
  fs::path dir;
};

struct Criterion {
  int id;
  std::string title;
  bool pass = true;
  std::vector<std::string> detail;
};

std::string num(double v, int prec = 4) {
  std::ostringstream os;
  os << std::setprecision(prec) << v;
  return os.str();
}

const Check* find_check(const ExperimentResult& r, const std::string& name) {
  for (const auto& c : r.checks)
    if (c.name == name) return &c;
  return nullptr;
}

double pooled(const ExperimentResult& r, const std::string& key) {
  auto it = r.pooled.find(key);
  return it == r.pooled.end() ? std::nan("") : it->second;
}

bool starts_with(const std::string& s, const std::string& p) { return s.rfind(p, 0) == 0; }

void require_check(Criterion& c, const std::string& run_name, const ExperimentResult& r, const std::string& check) {
  const Check* ch = find_check(r, check);
  if (!ch) {
    c.pass = false;
    c.detail.push_back(run_name + ": missing check " + check);
    return;
  }
  c.pass = c.pass && ch->pass;
  c.detail.push_back(run_name + " " + check + " = " + num(ch->value) + " " + ch->op + " " + num(ch->threshold) +
                     (ch->pass ? "" : "  <- fails"));
}

void require_runtime(Criterion& c, const std::vector<const Run*>& runs, double limit) {
  double total = 0.0;
  for (const auto* r : runs) total += r->result.wall_seconds;
  const bool ok = total < limit;
  c.pass = c.pass && ok;
  c.detail.push_back("runtime " + num(total, 3) + " s (limit " + num(limit, 3) + " s)" + (ok ? "" : "  <- fails"));
}

} // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::cerr << "usage: acceptance <manifest> <output dir>\n";
    return 2;
  }
  const fs::path manifest = argv[1];
  const fs::path out = argv[2];
  fs::remove_all(out);

  std::vector<std::string> files;
  {
    std::ifstream in(manifest);
    if (!in) {
      std::cerr << "cannot read " << manifest << '\n';
      return 2;
    }
    for (std::string line; std::getline(in, line);) {
      if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
      line.erase(0, line.find_first_not_of(" \t\r"));
      line.erase(line.find_last_not_of(" \t\r") + 1);
      if (!line.empty()) files.push_back(line);
    }
  }

  // Every config runs with 8 workers; the determinism replay uses 1.
  std::map<std::string, Run> runs;
  std::vector<std::string> failures;
  for (const auto& f : files) {
    try {
      auto cfg = with_overrides(load_config(manifest.parent_path() / f), {{"threads", "8"}});
      const std::string name = cfg.name.empty() ? fs::path(f).stem().string() : cfg.name;
      std::cout << "running " << name << " ..." << std::flush;
      Run run{run_experiment(cfg), out / name};
      write_report(run.result, run.dir);
      std::cout << ' ' << (run.result.pass ? "pass" : "FAIL") << " (" << num(run.result.wall_seconds, 3) << " s)\n";
      runs.emplace(name, std::move(run));
    } catch (const std::exception& e) {
      std::cout << '\n';
      failures.push_back(f + ": " + e.what());
    }
  }

  auto select = [&](const std::string& prefix) {
    std::vector<const Run*> v;
    for (const auto& [name, run] : runs)
      if (starts_with(name, prefix)) v.push_back(&run);
    return v;
  };
  auto name_of = [](const Run* r) { return r->result.config.name; };

  std::vector<Criterion> crit;

  {
    Criterion c{1, "fBm increment covariance within 5 MC standard errors (h = 0.3, 0.5, 0.75)"};
    const auto rs = select("c1_");
    c.pass = rs.size() == 3;
    for (const auto* r : rs) require_check(c, name_of(r), r->result, "max_abs_z");
    require_runtime(c, rs, 60.0);
    crit.push_back(c);
  }
  {
    Criterion c{2, "path Holder exponent within 0.05 of h (h = 0.3, 0.5)"};
    const auto rs = select("c2_");
    c.pass = rs.size() == 2;
    for (const auto* r : rs) require_check(c, name_of(r), r->result, "exponent_deviation");
    crit.push_back(c);
  }
  {
    Criterion c{3, "wong_zakai error vs scale-map oracle monotone, < 1e-2 at 2^14"};
    const auto rs = select("c3_");
    c.pass = rs.size() == 1;
    for (const auto* r : rs)
      for (const auto& ch : r->result.checks) require_check(c, name_of(r), r->result, ch.name);
    require_runtime(c, rs, 120.0);
    crit.push_back(c);
  }
  {
    Criterion c{4, "occupation identity < 1e-2 on every local-time field in the suite"};
    double worst = 0.0;
    std::size_t n_runs = 0, n_fields = 0;
    for (const auto& [name, run] : runs) {
      const auto& cols = run.result.per_path.columns;
      auto it = std::find(cols.begin(), cols.end(), "max_identity_error");
      if (it == cols.end() || run.result.config.source == "planted") continue;
      const std::size_t col = static_cast<std::size_t>(it - cols.begin());
      ++n_runs;
      for (const auto& row : run.result.per_path.rows) {
        worst = std::max(worst, row[col]);
        ++n_fields;
      }
    }
    c.pass = n_fields > 0 && worst < 1e-2;
    c.detail.push_back(std::to_string(n_fields) + " fields from " + std::to_string(n_runs) + " runs, worst " +
                       num(worst));
    crit.push_back(c);
  }
  {
    Criterion c{5, "pooled time-Holder exponent of L^a in 0.7 +- 0.1, >= 0.55, <= 0.80 (V = 1 and 2 + sin x)"};
    const auto rs = select("c5_");
    c.pass = rs.size() == 2;
    for (const auto* r : rs) {
      for (const char* k : {"exponent_deviation", "exponent_lower", "exponent_upper"})
        require_check(c, name_of(r), r->result, k);
      c.detail.push_back(name_of(r) + " median " + num(pooled(r->result, "median_exponent")) + ", 95% CI [" +
                         num(pooled(r->result, "ci_low")) + ", " + num(pooled(r->result, "ci_high")) + "]");
    }
    require_runtime(c, rs, 600.0);
    crit.push_back(c);
  }
  {
    Criterion c{6, "delta <= 2 sup_x dL osc(X) (1 + 0.05) on every path and rung of criterion 5"};
    const auto rs = select("c5_");
    c.pass = rs.size() == 2;
    for (const auto* r : rs) {
      require_check(c, name_of(r), r->result, "inequality_violations");
      c.detail.push_back(name_of(r) + " max delta / rhs " + num(pooled(r->result, "max_inequality_ratio")));
    }
    crit.push_back(c);
  }
  {
    Criterion c{7, "sup-density slope: -0.5 (Gaussian), -0.3 (fBm), -0.3 +- 0.1 (2 + sin x)"};
    const auto rs = select("c7_");
    c.pass = rs.size() == 3;
    for (const auto* r : rs) {
      require_check(c, name_of(r), r->result, "slope_deviation");
      require_check(c, name_of(r), r->result, "kde_normalization");
      c.detail.push_back(name_of(r) + " slope " + num(pooled(r->result, "fitted_slope")) + " (bandwidth x0.5: " +
                         num(pooled(r->result, "slope_half_bw")) + ", x2: " +
                         num(pooled(r->result, "slope_double_bw")) + ")");
    }
    require_runtime(c, rs, 300.0);
    crit.push_back(c);
  }
  {
    Criterion c{8, "tail exponent >= 2 gamma - 0.1 (h = 0.3, gamma = 0.24)"};
    const auto rs = select("c8_");
    c.pass = rs.size() == 1;
    for (const auto* r : rs) require_check(c, name_of(r), r->result, "tail_exponent");
    crit.push_back(c);
  }
  {
    Criterion c{9, "existence criterion flat across eps (fBm h = 0.3); deterministic control exactly 2"};
    const auto rs = select("c9_");
    c.pass = rs.size() == 2;
    for (const auto* r : rs) {
      require_check(c, name_of(r), r->result, "growth_slope");
      if (find_check(r->result, "value_deviation")) require_check(c, name_of(r), r->result, "value_deviation");
    }
    crit.push_back(c);
  }
  {
    Criterion c{10, "suite replayed with threads 1 vs 8 gives bit-identical per-path records"};
    c.pass = !runs.empty();
    std::size_t identical = 0;
    for (const auto& [name, run] : runs) {
      try {
        const auto rr = replay(run.dir / "report.json", {{"threads", "1"}});
        if (rr.identical) ++identical;
        else c.detail.push_back(name + ": digest " + rr.result.digest + " != " + rr.recorded_digest);
        c.pass = c.pass && rr.identical;
      } catch (const std::exception& e) {
        c.pass = false;
        c.detail.push_back(name + ": " + e.what());
      }
    }
    c.detail.push_back(std::to_string(identical) + "/" + std::to_string(runs.size()) + " reports identical");
    crit.push_back(c);
  }
  {
    Criterion c{11, "planted fields recover beta within 0.1 (beta = 0.3, 0.5, 0.7)"};
    const auto rs = select("c11_");
    c.pass = rs.size() == 3;
    for (const auto* r : rs) {
      require_check(c, name_of(r), r->result, "exponent_deviation");
      c.detail.push_back(name_of(r) + " median " + num(pooled(r->result, "median_exponent")));
    }
    crit.push_back(c);
  }

  std::cout << '\n';
  bool all = failures.empty();
  for (const auto& f : failures) std::cout << "ERROR " << f << '\n';
  for (const auto& c : crit) {
    all = all && c.pass;
    std::cout << (c.pass ? "PASS" : "FAIL") << " criterion " << c.id << ": " << c.title << '\n';
    for (const auto& d : c.detail) std::cout << "       " << d << '\n';
  }
  std::cout << (all ? "all criteria pass\n" : "some criteria fail\n");
  return all ? 0 : 1;
}
