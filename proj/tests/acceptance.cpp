// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any
// fails. Usage: dbmatch_acceptance <path-to-dbmatch-cli> [workdir]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <thread>
#include <vector>

#include "dbmatch/detector.hpp"
#include "dbmatch/errors.hpp"
#include "dbmatch/harness.hpp"
#include "dbmatch/infotheory.hpp"
#include "dbmatch/stats.hpp"
#include "test_support.hpp"

using namespace dbmatch;
namespace fs = std::filesystem;

namespace {

std::string g_cli;
fs::path g_work;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::size_t workers() { return std::max(1u, std::thread::hardware_concurrency()); }

double hb(double x) { return x <= 0 || x >= 1 ? 0.0 : -x * std::log2(x) - (1 - x) * std::log2(1 - x); }

double entropy_of(const std::vector<double>& p) {
  double h = 0;
  for (double v : p) {
    if (v > 0) h -= v * std::log2(v);
  }
  return h;
}

Outcome rate_reductions() {
  const std::vector<std::vector<double>> pmfs{
      {0.5, 0.5}, {0.8, 0.2}, {0.9, 0.1}, {1.0 / 3, 1.0 / 3, 1.0 / 3}, {0.5, 0.3, 0.2}};
  double worst = 0;
  int points = 0;
  for (const auto& p : pmfs) {
    const Distribution d(p);
    const double h = entropy_of(p);
    const double q = static_cast<double>(p.size());
    for (int i = 0; i < 10; ++i) {
      const double delta = 0.095 * i;
      const double none = std::max(0.0, h - hb(delta) - delta * std::log2(q - 1));
      const double full = (1 - delta) * h;
      worst = std::max(worst, std::abs(info::achievable_rate({d, delta, 0.0}).rate - none));
      worst = std::max(worst, std::abs(info::achievable_rate({d, delta, 1.0}).rate - full));
      ++points;
    }
  }
  std::ostringstream s;
  s << points << " grid points, max deviation " << worst;
  return {points == 50 && worst <= 1e-12, s.str()};
}

Outcome twenty_fold() {
  const auto bern = Distribution::bernoulli(0.5);
  const double full = info::achievable_rate({bern, 0.4, 1.0}).rate;
  const double none = info::achievable_rate({bern, 0.4, 0.0}).rate;
  const double ratio = full / none;
  char buf[160];
  std::snprintf(buf, sizeof buf, "R(alpha=1)=%.6f R(alpha=0)=%.6f ratio=%.3f", full, none, ratio);
  const bool ok = std::abs(full - 0.6) < 5e-7 && std::abs(none - 0.029049) <= 1e-5 && std::abs(ratio - 20.7) <= 0.1;
  return {ok, buf};
}

// Random seed-batch instances with n <= 12, B <= 3, q in {2, 3}; one in eight
// has an unrelated d2 so that inconsistent batches are covered.
std::vector<std::pair<Database, Database>> instance_family(std::uint64_t seed, int count) {
  Rng rng(seed);
  std::vector<std::pair<Database, Database>> out;
  for (int i = 0; i < count; ++i) {
    const std::size_t n = 1 + rng.below(12);
    const std::size_t b = 1 + rng.below(3);
    const std::size_t q = 2 + rng.below(2);
    const auto d1 = testing::random_database(rng, b, n, q);
    auto d2 = delete_columns(d1, testing::random_flags(rng, n, rng.uniform01()));
    if (rng.below(8) == 0) d2 = testing::random_database(rng, b, d2.cols(), q);
    out.emplace_back(d1, d2);
  }
  return out;
}

Outcome counting_oracle() {
  const auto family = instance_family(2024, 1200);
  int failures = 0;
  for (const auto& [d1, d2] : family) {
    if (detector::count_embeddings(d1, d2) != testing::enumerate_patterns(d1, d2).total) ++failures;
  }
  return {failures == 0, std::to_string(family.size()) + " instances, " + std::to_string(failures) + " failures"};
}

Outcome posterior_oracle() {
  const auto family = instance_family(2024, 1200);
  int failures = 0, consistent = 0, rejected = 0;
  for (const auto& [d1, d2] : family) {
    const auto e = testing::enumerate_patterns(d1, d2);
    if (e.total == 0) {
      try {
        detector::posterior_deletions(d1, d2);
        ++failures;
      } catch (const InconsistencyError&) {
        ++rejected;
      }
      continue;
    }
    ++consistent;
    const auto post = detector::posterior_deletions(d1, d2);
    BigCount sum = 0;
    bool ok = post.size() == d1.cols();
    for (std::size_t j = 0; ok && j < post.size(); ++j) {
      ok = post[j].numerator * e.total == e.deleted[j] * post[j].denominator;
      sum += post[j].numerator;
    }
    // All denominators equal S, so the sum of numerators must be (n - K) S.
    ok = ok && sum == e.total * (d1.cols() - d2.cols());
    if (!ok) ++failures;
  }
  return {failures == 0 && consistent >= 1000,
          std::to_string(consistent) + " consistent + " + std::to_string(rejected) + " rejected instances, " +
              std::to_string(failures) + " failures"};
}

Outcome supersequence_bound() {
  int exact_failures = 0, exact_cases = 0;
  for (std::size_t q : {2u, 3u}) {
    for (std::size_t n = 0; n <= 12; ++n) {
      // One pass over all q^n strings: with the fixed string f = 0,1,0,1,...
      // of length n, a string contains the length-k prefix of f iff the
      // greedy match reaches k.
      std::vector<std::uint64_t> reach(n + 2, 0);
      std::vector<Symbol> x(n, 0);
      for (;;) {
        std::size_t t = 0;
        for (std::size_t j = 0; j < n; ++j) {
          if (t < n && x[j] == static_cast<Symbol>(t % 2)) ++t;
        }
        ++reach[t];
        std::size_t i = 0;
        while (i < n && x[i] == q - 1) x[i++] = 0;
        if (i == n) break;
        ++x[i];
      }
      std::uint64_t at_least = 0;
      for (std::size_t k = n + 1; k-- > 0;) {
        at_least += reach[k];
        ++exact_cases;
        if (info::supersequence_count_exact(n, k, q) != at_least) ++exact_failures;
      }
    }
  }
  int bound_failures = 0, bound_cases = 0;
  for (std::size_t q : {2u, 3u}) {
    for (std::size_t n = 1; n <= 20; ++n) {
      for (std::size_t k = 0; k <= n; ++k) {
        if (k * q < n) continue;
        ++bound_cases;
        if (log2_count(info::supersequence_count_exact(n, k, q)) >
            info::supersequence_count_bound_log2(n, k, q) + 1e-9) {
          ++bound_failures;
        }
      }
    }
  }
  std::ostringstream s;
  s << exact_cases << " exact cases (" << exact_failures << " failures), " << bound_cases << " bound cases ("
    << bound_failures << " violations)";
  return {exact_failures == 0 && bound_failures == 0, s.str()};
}

Outcome detection_bound_grid() {
  int violations = 0, points = 0;
  double worst_margin = 1e9;
  for (double delta : {0.25, 0.5}) {
    harness::DetectConfig cfg;
    cfg.n_values = {16, 64, 256};
    cfg.batch_sizes = {8, 16, 24};
    cfg.delta = delta;
    cfg.epsilon = 0.05;
    cfg.trials = 500;
    cfg.master_seed = 7;
    cfg.threads = workers();
    for (const auto& p : harness::simulate_detect(cfg)) {
      ++points;
      const double half = (p.estimate.ci.high - p.estimate.ci.low) / 2;
      const double margin = p.estimate.estimate + half - p.bound.raw;
      worst_margin = std::min(worst_margin, margin);
      if (margin < 0) ++violations;
    }
  }
  std::ostringstream s;
  s << points << " grid points, " << violations << " violations, smallest margin " << worst_margin;
  return {points == 18 && violations == 0, s.str()};
}

Outcome g_implies_f() {
  Rng rng(77);
  const auto bern = Distribution::bernoulli(0.5);
  int batches = 0, g_deleted = 0, violations = 0;
  while (batches < 1200) {
    const std::size_t n = 1 + rng.below(40);
    const std::size_t m = 2 + rng.below(10);
    const auto c1 = sample_database(bern, m, n, rng.next());
    const auto exp = apply_deletion_channel(c1, 0.9 * rng.uniform01(), 0.0, rng.next());
    const auto batch = extract_seed_batch(exp, 1 + rng.below(std::min<std::size_t>(m, 5)), rng.next());
    const double eps = 0.1 * static_cast<double>(rng.below(10));
    const auto f = detector::detect_f(batch, bern, eps);
    const auto g = detector::detect_g(batch, bern, eps);
    for (std::size_t j = 0; j < f.size(); ++j) {
      if (g[j] != detector::Verdict::kDeleted) continue;
      ++g_deleted;
      if (f[j] != detector::Verdict::kDeleted) ++violations;
    }
    ++batches;
  }
  return {violations == 0 && g_deleted > 0, std::to_string(batches) + " batches, " + std::to_string(g_deleted) +
                                                " g-deleted columns, " + std::to_string(violations) + " violations"};
}

Outcome matching_trend() {
  harness::ExperimentConfig cfg;
  cfg.n_values = {16, 32};
  cfg.rate = 0.25 * (1 - 0.2);
  cfg.delta = 0.2;
  cfg.side_info = harness::GivenAlpha{1.0};
  cfg.trials = 500;
  cfg.master_seed = 11;
  cfg.threads = workers();
  const auto low = harness::simulate_match(cfg);
  const double p = fisher_exact_greater(low[0].mismatches_total, low[0].rows_total, low[1].mismatches_total,
                                        low[1].rows_total);
  cfg.rate = 1.2 * info::entropy(Distribution::bernoulli(0.5));
  cfg.n_values = {32};
  const auto high = harness::simulate_match(cfg).front();
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "R=0.2: n=16 %llu/%llu, n=32 %llu/%llu, one-sided p=%.3g; R=1.2H n=32 mismatch_rate=%.4f (%s rows)",
                static_cast<unsigned long long>(low[0].mismatches_total),
                static_cast<unsigned long long>(low[0].rows_total),
                static_cast<unsigned long long>(low[1].mismatches_total),
                static_cast<unsigned long long>(low[1].rows_total), p, high.mismatch_rate(),
                harness::row_model_name(high.model));
  const bool improves = low[1].mismatch_rate() < low[0].mismatch_rate() && p < 0.01;
  return {improves && high.mismatch_rate() >= 0.9, buf};
}

int run_cli(const std::string& args) {
  const std::string cmd = g_cli + " " + args + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
    rows.push_back(cells);
  }
  return rows;
}

std::string column(const std::vector<std::vector<std::string>>& rows, const std::string& name) {
  std::size_t idx = 0;
  while (idx < rows[0].size() && rows[0][idx] != name) ++idx;
  std::string out;
  for (std::size_t r = 1; r < rows.size(); ++r) out += (idx < rows[r].size() ? rows[r][idx] : "?") + ";";
  return out;
}

Outcome pipeline_reduction() {
  const std::string common = " --n 16,24,32 --rate 0.2 --delta 0.3 --trials 200 --seed 5 --threads 4";
  const auto m = g_work / "reduction_match.csv", mt = g_work / "reduction_match_trials.csv";
  const auto p = g_work / "reduction_pipe.csv", pt = g_work / "reduction_pipe_trials.csv";
  if (run_cli("simulate-match --alpha 0" + common + " --out " + m.string() + " --trials-out " + mt.string()) != 0 ||
      run_cli("pipeline --batch 0" + common + " --out " + p.string() + " --trials-out " + pt.string()) != 0) {
    return {false, "CLI run failed"};
  }
  const bool trials_same = slurp(mt) == slurp(pt) && !slurp(mt).empty();
  const auto a = csv_rows(slurp(m)), b = csv_rows(slurp(p));
  bool shared_same = a.size() == b.size();
  for (const char* name : {"n", "R", "delta", "mismatch_rate", "ci_low", "ci_high"}) {
    shared_same = shared_same && column(a, name) == column(b, name);
  }
  return {trials_same && shared_same, std::string("per-trial CSV ") + (trials_same ? "byte-identical" : "DIFFERS") +
                                          ", shared summary columns " + (shared_same ? "identical" : "DIFFER")};
}

Outcome determinism() {
  const std::vector<std::pair<std::string, std::string>> commands{
      {"rates", "rates --deltas 0:0.05:0.95"},
      {"match", "simulate-match --n 16,24,32 --rate 0.3 --delta 0.3 --alpha 0.5 --trials 200 --seed 3"},
      {"match_implicit", "simulate-match --n 32 --rate 1.2 --delta 0.2 --alpha 1 --trials 200 --seed 3"},
      {"detect", "simulate-detect --n 16,64 --batch 8,16 --delta 0.5 --trials 200 --seed 3"},
      {"pipeline", "pipeline --n 32 --rate 0.1 --delta 0.3 --batch 0,2,4,8 --trials 200 --seed 3"},
      {"oracle", "oracle-check --cases 300 --seed 3"},
  };
  int same = 0;
  std::string differing;
  for (const auto& [name, args] : commands) {
    std::string outputs[2];
    for (int w = 0; w < 2; ++w) {
      const auto out = g_work / (name + "_w" + std::to_string(w) + ".csv");
      const auto trials = g_work / (name + "_w" + std::to_string(w) + "_trials.csv");
      const bool has_trials = name == "match" || name == "match_implicit" || name == "pipeline";
      const std::string extra = has_trials ? " --trials-out " + trials.string() : "";
      if (run_cli(args + " --threads " + (w == 0 ? "1" : "8") + " --out " + out.string() + extra) != 0) {
        return {false, name + " failed to run"};
      }
      outputs[w] = slurp(out) + (has_trials ? slurp(trials) : "");
    }
    if (outputs[0] == outputs[1] && !outputs[0].empty()) {
      ++same;
    } else {
      differing += " " + name;
    }
  }
  return {same == static_cast<int>(commands.size()),
          std::to_string(same) + "/" + std::to_string(commands.size()) + " commands byte-identical with 1 and 8 workers" +
              (differing.empty() ? "" : "; differing:" + differing)};
}

struct Criterion {
  int id;
  const char* name;
  double limit_seconds;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: dbmatch_acceptance <dbmatch-cli> [workdir]\n";
    return 2;
  }
  g_cli = argv[1];
  g_work = argc > 2 ? fs::path(argv[2]) : fs::temp_directory_path() / "dbmatch_acceptance";
  fs::create_directories(g_work);

  const std::vector<Criterion> criteria{
      {1, "rate formula reduces to the no-location and full-location forms", 1, rate_reductions},
      {2, "Bern(1/2), delta=0.4 rates and twenty-fold ratio", 1, twenty_fold},
      {3, "embedding count equals exhaustive enumeration", 60, counting_oracle},
      {4, "posteriors equal Bayes enumeration; sum equals n-K", 60, posterior_oracle},
      {5, "supersequence count exact and bounded", 30, supersequence_bound},
      {6, "detection probability never below the lower bound", 600, detection_bound_grid},
      {7, "g-Deleted implies f-Deleted", 60, g_implies_f},
      {8, "matching improves with n below capacity, fails above entropy", 600, matching_trend},
      {9, "pipeline with B=0 reproduces matching with alpha=0", 60, pipeline_reduction},
      {10, "byte-identical output with 1 and 8 workers", 300, determinism},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < c.limit_seconds;
    const bool pass = o.pass && in_time;
    if (!pass) ++failed;
    char timing[96];
    std::snprintf(timing, sizeof timing, "%.2fs of %.0fs%s", secs, c.limit_seconds, in_time ? "" : " EXCEEDED");
    std::cout << (pass ? "PASS" : "FAIL") << " criterion " << c.id << ": " << c.name << " -- " << o.detail << " ["
              << timing << "]" << std::endl;
  }
  std::cout << (failed == 0 ? "ALL CRITERIA PASSED" : std::to_string(failed) + " CRITERIA FAILED") << std::endl;
  return failed == 0 ? 0 : 1;
}
