#include "dbmatch/oracles.hpp"

#include <algorithm>
#include <sstream>

#include "dbmatch/errors.hpp"
#include "dbmatch/infotheory.hpp"
#include "dbmatch/matcher.hpp"
#include "dbmatch/model_io.hpp"
#include "dbmatch/rng.hpp"

namespace dbmatch::oracles {

namespace {

constexpr std::uint64_t kEnumerationLimit = std::uint64_t{1} << 24;

Database random_database(Rng& rng, std::size_t rows, std::size_t cols, std::size_t q) {
  std::vector<Symbol> data(rows * cols);
  for (auto& s : data) s = static_cast<Symbol>(rng.below(q));
  return Database(rows, cols, q, std::move(data));
}

std::string dump_instance(const Database& d1, const Database& d2) {
  std::ostringstream out;
  out << "d1:\n";
  write_database_csv(out, d1);
  out << "d2:\n";
  write_database_csv(out, d2);
  return out.str();
}

std::string dump_posteriors(const char* label, const detector::PosteriorVector& p) {
  std::ostringstream out;
  out << label << ':';
  for (const auto& e : p) out << ' ' << e.numerator.str() << '/' << e.denominator.str();
  out << '\n';
  return out.str();
}

void record(CheckResult& check, bool ok, const std::string& dump) {
  ++check.instances;
  if (!ok) {
    if (check.failures == 0) check.counterexample = dump;
    ++check.failures;
  }
}

struct Instance {
  Database d1;
  Database d2;
  std::size_t q = 2;
  bool consistent = true;
  std::vector<std::uint8_t> deleted;
};

Instance make_instance(const SuiteConfig& cfg, std::size_t index) {
  Rng rng(split_seed(cfg.seed, index));
  Instance inst;
  const std::size_t n = 1 + rng.below(cfg.max_n);
  const std::size_t b = 1 + rng.below(cfg.max_batch);
  inst.q = 2 + rng.below(2);
  inst.d1 = random_database(rng, b, n, inst.q);
  inst.deleted.assign(n, 0);
  switch (index % 6) {
    case 0:  // nothing deleted
      break;
    case 1:  // everything deleted: d2 is empty
      std::fill(inst.deleted.begin(), inst.deleted.end(), 1);
      break;
    case 5: {  // unrelated d2, usually inconsistent
      inst.consistent = false;
      inst.d2 = random_database(rng, b, rng.below(n + 1), inst.q);
      return inst;
    }
    default: {
      const double delta = 0.25 * static_cast<double>(index % 6 - 1);
      for (auto& f : inst.deleted) f = rng.bernoulli(delta) ? 1 : 0;
      break;
    }
  }
  inst.d2 = delete_columns(inst.d1, inst.deleted);
  return inst;
}

}  // namespace

BigCount supersequence_count_brute_force(std::size_t n, std::span<const Symbol> fixed, std::size_t q) {
  BigCount total_strings = 1;
  for (std::size_t i = 0; i < n; ++i) total_strings *= q;
  if (total_strings > kEnumerationLimit) throw GuardError("supersequence enumeration exceeds 2^24 strings");
  std::vector<Symbol> x(n, 0);
  BigCount count = 0;
  for (;;) {
    if (matcher::is_subsequence(fixed, x)) ++count;
    std::size_t i = 0;
    while (i < n && x[i] == q - 1) x[i++] = 0;
    if (i == n) break;
    ++x[i];
  }
  return count;
}

bool SuiteReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.failures == 0; });
}

namespace {

CheckResult named_check(std::string name) {
  CheckResult c;
  c.name = std::move(name);
  return c;
}

}  // namespace

SuiteReport run_suite(const SuiteConfig& cfg) {
  if (cfg.max_n == 0 || cfg.max_batch == 0) throw ConfigError("oracle suite needs max_n >= 1 and max_batch >= 1");
  if (!cfg.allow_large && (cfg.max_n > 12 || cfg.max_supersequence_n > 12)) {
    throw GuardError("exhaustive oracles are limited to n <= 12");
  }
  CheckResult count_check = named_check("count_embeddings = enumeration");
  CheckResult posterior_check = named_check("posterior_deletions = Bayes enumeration");
  CheckResult naive_check = named_check("prefix/suffix posteriors = naive n+1 DP");
  CheckResult sum_check = named_check("sum of posteriors = n - K");
  CheckResult absence_check = named_check("absent column has posterior 1");
  CheckResult implication_check = named_check("g Deleted implies f Deleted");
  CheckResult inconsistent_check = named_check("inconsistent batches are rejected");
  CheckResult empty_check = named_check("fully deleted batches");

  for (std::size_t index = 0; index < cfg.cases; ++index) {
    const Instance inst = make_instance(cfg, index);
    const auto& d1 = inst.d1;
    const auto& d2 = inst.d2;
    const auto dump = dump_instance(d1, d2);

    const auto fast = detector::detail::count_embeddings(d1, d2, cfg.fault);
    const auto slow = detector::brute_force_embeddings(d1, d2, kEnumerationLimit);
    record(count_check, fast == slow, dump + "dp=" + fast.str() + " enumeration=" + slow.str() + "\n");

    if (slow == 0) {
      bool threw = false;
      try {
        (void)detector::posterior_deletions(d1, d2);
      } catch (const InconsistencyError&) {
        threw = true;
      }
      record(inconsistent_check, threw, dump);
      continue;
    }

    const auto posterior = detector::posterior_deletions(d1, d2);
    const auto bayes = detector::brute_force_posterior(d1, d2, kEnumerationLimit);
    const auto naive = detector::posterior_deletions_naive(d1, d2);
    record(posterior_check, posterior == bayes,
           dump + dump_posteriors("prefix/suffix", posterior) + dump_posteriors("enumeration", bayes));
    record(naive_check, posterior == naive,
           dump + dump_posteriors("prefix/suffix", posterior) + dump_posteriors("naive", naive));

    BigCount numerator_sum = 0;
    for (const auto& p : posterior) numerator_sum += p.numerator;
    const BigCount expected_sum = BigCount(d1.cols() - d2.cols()) * posterior.front().denominator;
    record(sum_check, numerator_sum == expected_sum, dump + dump_posteriors("posterior", posterior));

    SeedBatch batch{d1, d2, {}};
    const auto dist = Distribution::uniform(inst.q);
    const double epsilon = 0.05 * static_cast<double>(index % 4);
    const auto g = detector::detect_g(batch, dist, epsilon);
    const auto f = detector::verdicts_from_posteriors(d1, posterior, dist, epsilon);
    bool implied = true;
    bool absent_ok = true;
    for (std::size_t j = 0; j < d1.cols(); ++j) {
      if (g[j] == detector::Verdict::kDeleted && f[j] != detector::Verdict::kDeleted) implied = false;
      const auto column = d1.column(j);
      bool present = false;
      for (std::size_t t = 0; t < d2.cols() && !present; ++t) present = d2.column(t) == column;
      if (!present && !posterior[j].is_one()) absent_ok = false;
    }
    record(implication_check, implied, dump);
    record(absence_check, absent_ok, dump + dump_posteriors("posterior", posterior));

    if (inst.consistent && d2.cols() == 0) {
      const bool all_one = std::all_of(posterior.begin(), posterior.end(), [](const auto& p) { return p.is_one(); });
      record(empty_check, all_one && slow == 1, dump + dump_posteriors("posterior", posterior));
    }
  }

  CheckResult exact_check = named_check("supersequence count = enumeration");
  CheckResult bound_check = named_check("supersequence count <= bound (k >= n/q)");
  Rng rng(split_seed(cfg.seed, std::uint64_t{0xF0F0}));
  for (std::size_t q = 2; q <= 3; ++q) {
    for (std::size_t n = 0; n <= cfg.max_supersequence_n; ++n) {
      for (std::size_t k = 0; k <= n; ++k) {
        std::vector<Symbol> fixed(k);
        for (auto& s : fixed) s = static_cast<Symbol>(rng.below(q));
        const auto exact = info::supersequence_count_exact(n, k, q);
        const auto brute = supersequence_count_brute_force(n, fixed, q);
        std::ostringstream dump;
        dump << "n=" << n << " k=" << k << " q=" << q << " exact=" << exact.str() << " enumeration=" << brute.str()
             << '\n';
        record(exact_check, exact == brute, dump.str());
      }
    }
    for (std::size_t n = 1; n <= cfg.max_bound_n; ++n) {
      for (std::size_t k = 0; k <= n; ++k) {
        if (k * q < n) continue;
        const double bound = info::supersequence_count_bound_log2(n, k, q);
        const double exact = log2_count(info::supersequence_count_exact(n, k, q));
        std::ostringstream dump;
        dump << "n=" << n << " k=" << k << " q=" << q << " log2F=" << exact << " bound=" << bound << '\n';
        record(bound_check, exact <= bound, dump.str());
      }
    }
  }

  SuiteReport report;
  report.checks = {count_check,    posterior_check,   naive_check,        sum_check,   absence_check,
                   implication_check, inconsistent_check, empty_check, exact_check, bound_check};
  return report;
}

}  // namespace dbmatch::oracles
