#include "dbmatch/detector.hpp"

#include <algorithm>
#include <ostream>
#include <unordered_map>

#include "dbmatch/errors.hpp"
#include "dbmatch/infotheory.hpp"
#include "dbmatch/parallel.hpp"

namespace dbmatch::detector {

namespace {

/// Columns of both matrices mapped to small integer identities: equal
/// columns share an id. Columns are hashed once and hash hits are verified
/// entrywise.
struct ColumnIds {
  std::vector<std::uint32_t> d1;
  std::vector<std::uint32_t> d2;
};

std::vector<Symbol> transpose(const Database& db) {
  std::vector<Symbol> out(db.rows() * db.cols());
  for (std::size_t i = 0; i < db.rows(); ++i) {
    for (std::size_t j = 0; j < db.cols(); ++j) out[j * db.rows() + i] = db.at(i, j);
  }
  return out;
}

ColumnIds identify_columns(const Database& d1, const Database& d2) {
  const std::size_t b = d1.rows();
  const auto t1 = transpose(d1);
  const auto t2 = transpose(d2);

  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> by_hash;
  std::vector<const Symbol*> representative;
  auto id_of = [&](const Symbol* col) -> std::uint32_t {
    std::uint64_t h = 0x6a09e667f3bcc909ULL;
    for (std::size_t i = 0; i < b; ++i) h = mix64(h ^ col[i]);
    auto& bucket = by_hash[h];
    for (std::uint32_t id : bucket) {
      if (std::equal(col, col + b, representative[id])) return id;
    }
    const auto id = static_cast<std::uint32_t>(representative.size());
    representative.push_back(col);
    bucket.push_back(id);
    return id;
  };

  ColumnIds ids;
  ids.d1.resize(d1.cols());
  ids.d2.resize(d2.cols());
  for (std::size_t j = 0; j < d1.cols(); ++j) ids.d1[j] = id_of(t1.data() + j * b);
  for (std::size_t t = 0; t < d2.cols(); ++t) ids.d2[t] = id_of(t2.data() + t * b);
  return ids;
}

void check_batch_shapes(const Database& d1, const Database& d2) {
  if (d1.rows() != d2.rows()) {
    throw ArgumentError("batch halves have different row counts (" + std::to_string(d1.rows()) + " vs " +
                        std::to_string(d2.rows()) + ")");
  }
}

/// d2 positions (1-based) grouped by column id, descending, so the rolling
/// DP can update f[t] from f[t-1] in place.
std::vector<std::vector<std::size_t>> positions_by_id(const ColumnIds& ids) {
  std::uint32_t max_id = 0;
  for (auto id : ids.d1) max_id = std::max(max_id, id);
  for (auto id : ids.d2) max_id = std::max(max_id, id);
  std::vector<std::vector<std::size_t>> positions(static_cast<std::size_t>(max_id) + 1);
  for (std::size_t t = ids.d2.size(); t >= 1; --t) positions[ids.d2[t - 1]].push_back(t);
  return positions;
}

bool column_typical(const Database& d1, std::size_t j, const Distribution& dist, double epsilon) {
  const auto column = d1.column(j);
  return info::is_typical(column, dist, {epsilon, column.size()});
}

BigCount choose(std::size_t n, std::size_t k) {
  BigCount c = 1;
  for (std::size_t i = 0; i < k; ++i) c = c * (n - i) / (i + 1);
  return c;
}

/// Calls visit(kept) for every increasing K-subset of [0, n).
template <class Visit>
void for_each_subset(std::size_t n, std::size_t k, Visit&& visit) {
  std::vector<std::size_t> kept(k);
  for (std::size_t t = 0; t < k; ++t) kept[t] = t;
  for (;;) {
    visit(static_cast<const std::vector<std::size_t>&>(kept));
    std::size_t t = k;
    while (t > 0 && kept[t - 1] == n - k + t - 1) --t;
    if (t == 0) return;
    ++kept[t - 1];
    for (std::size_t u = t; u < k; ++u) kept[u] = kept[u - 1] + 1;
  }
}

bool columns_equal(const Database& d1, std::size_t j, const Database& d2, std::size_t t) {
  for (std::size_t i = 0; i < d1.rows(); ++i) {
    if (d1.at(i, j) != d2.at(i, t)) return false;
  }
  return true;
}

void check_enumeration_guard(std::size_t n, std::size_t k, std::uint64_t limit) {
  if (choose(n, k) > limit) {
    throw GuardError("enumerating C(" + std::to_string(n) + "," + std::to_string(k) + ") patterns exceeds the limit of " +
                     std::to_string(limit));
  }
}

}  // namespace

double Posterior::value() const {
  if (denominator == 0) return 0.0;
  return std::exp2(log2_count(numerator) - log2_count(denominator));
}

const char* verdict_name(Verdict v) noexcept {
  switch (v) {
    case Verdict::kDeleted:
      return "deleted";
    case Verdict::kRetained:
      return "retained";
    case Verdict::kInconclusive:
      return "inconclusive";
  }
  return "unknown";
}

namespace detail {

EmbeddingCount count_embeddings(const Database& d1, const Database& d2, DpFault fault) {
  check_batch_shapes(d1, d2);
  const std::size_t n = d1.cols();
  const std::size_t k = d2.cols();
  if (k > n) return 0;
  const auto ids = identify_columns(d1, d2);
  const auto positions = positions_by_id(ids);

  // f[t] = embeddings of the first t d2 columns into the d1 columns seen so far.
  std::vector<BigCount> f(k + 1, 0);
  f[0] = 1;
  const std::size_t start = fault == DpFault::kSkipFirstColumn ? 1 : 0;
  for (std::size_t i = start; i < n; ++i) {
    for (std::size_t t : positions[ids.d1[i]]) {
      if (t <= i + 1) f[t] += f[t - 1];
    }
  }
  return f[k];
}

}  // namespace detail

EmbeddingCount count_embeddings(const Database& d1, const Database& d2) {
  return detail::count_embeddings(d1, d2, detail::DpFault::kNone);
}

PosteriorVector posterior_deletions(const Database& d1, const Database& d2) {
  check_batch_shapes(d1, d2);
  const std::size_t n = d1.cols();
  const std::size_t k = d2.cols();
  if (k > n) throw InconsistencyError("batch is inconsistent: d2 has more columns than d1");
  const auto ids = identify_columns(d1, d2);
  const auto positions = positions_by_id(ids);

  // prefix[i][t]: embeddings of d2[0, t) into d1[0, i).
  std::vector<std::vector<BigCount>> prefix(n + 1, std::vector<BigCount>(k + 1, 0));
  prefix[0][0] = 1;
  for (std::size_t i = 0; i < n; ++i) {
    prefix[i + 1] = prefix[i];
    for (std::size_t t : positions[ids.d1[i]]) prefix[i + 1][t] += prefix[i][t - 1];
  }
  const BigCount total = prefix[n][k];
  if (total == 0) throw InconsistencyError("batch is inconsistent: no deletion pattern maps d1 onto d2");

  // suffix[t]: embeddings of d2[t, K) into d1[j + 1, n), maintained right to left.
  // Patterns that delete column j split d2 into a prefix placed before j and
  // a suffix placed after it.
  std::vector<BigCount> suffix(k + 1, 0);
  suffix[k] = 1;
  PosteriorVector out(n);
  for (std::size_t j = n; j-- > 0;) {
    BigCount avoiding = 0;
    const auto& left = prefix[j];
    for (std::size_t t = 0; t <= k; ++t) {
      if (left[t] != 0 && suffix[t] != 0) avoiding += left[t] * suffix[t];
    }
    out[j] = Posterior{std::move(avoiding), total};
    for (std::size_t t = 0; t < k; ++t) {
      if (ids.d1[j] == ids.d2[t]) suffix[t] += suffix[t + 1];
    }
  }
  return out;
}

PosteriorVector posterior_deletions(const SeedBatch& batch) { return posterior_deletions(batch.d1, batch.d2); }

PosteriorVector posterior_deletions_naive(const Database& d1, const Database& d2) {
  check_batch_shapes(d1, d2);
  const BigCount total = count_embeddings(d1, d2);
  if (total == 0) throw InconsistencyError("batch is inconsistent: no deletion pattern maps d1 onto d2");
  PosteriorVector out(d1.cols());
  std::vector<std::uint8_t> drop(d1.cols(), 0);
  for (std::size_t j = 0; j < d1.cols(); ++j) {
    drop[j] = 1;
    out[j] = Posterior{count_embeddings(delete_columns(d1, drop), d2), total};
    drop[j] = 0;
  }
  return out;
}

std::vector<Verdict> verdicts_from_posteriors(const Database& d1, const PosteriorVector& posteriors,
                                              const Distribution& dist, double epsilon) {
  if (posteriors.size() != d1.cols()) throw ArgumentError("posterior vector length differs from n");
  std::vector<Verdict> out(d1.cols(), Verdict::kInconclusive);
  for (std::size_t j = 0; j < d1.cols(); ++j) {
    const bool certain_deleted = posteriors[j].is_one();
    const bool certain_retained = posteriors[j].is_zero();
    if ((certain_deleted || certain_retained) && column_typical(d1, j, dist, epsilon)) {
      out[j] = certain_deleted ? Verdict::kDeleted : Verdict::kRetained;
    }
  }
  return out;
}

std::vector<Verdict> detect_f(const SeedBatch& batch, const Distribution& dist, double epsilon) {
  return verdicts_from_posteriors(batch.d1, posterior_deletions(batch), dist, epsilon);
}

std::vector<Verdict> detect_g(const SeedBatch& batch, const Distribution& dist, double epsilon) {
  check_batch_shapes(batch.d1, batch.d2);
  const auto ids = identify_columns(batch.d1, batch.d2);
  std::vector<std::uint8_t> in_d2;
  for (auto id : ids.d2) {
    if (id >= in_d2.size()) in_d2.resize(id + 1, 0);
    in_d2[id] = 1;
  }
  std::vector<Verdict> out(batch.d1.cols(), Verdict::kInconclusive);
  for (std::size_t j = 0; j < batch.d1.cols(); ++j) {
    const bool absent = ids.d1[j] >= in_d2.size() || !in_d2[ids.d1[j]];
    if (absent && column_typical(batch.d1, j, dist, epsilon)) out[j] = Verdict::kDeleted;
  }
  return out;
}

EmbeddingCount brute_force_embeddings(const Database& d1, const Database& d2, std::uint64_t limit) {
  check_batch_shapes(d1, d2);
  const std::size_t n = d1.cols();
  const std::size_t k = d2.cols();
  if (k > n) return 0;
  check_enumeration_guard(n, k, limit);
  EmbeddingCount count = 0;
  for_each_subset(n, k, [&](const std::vector<std::size_t>& kept) {
    for (std::size_t t = 0; t < k; ++t) {
      if (!columns_equal(d1, kept[t], d2, t)) return;
    }
    ++count;
  });
  return count;
}

PosteriorVector brute_force_posterior(const Database& d1, const Database& d2, std::uint64_t limit) {
  check_batch_shapes(d1, d2);
  const std::size_t n = d1.cols();
  const std::size_t k = d2.cols();
  if (k > n) throw InconsistencyError("batch is inconsistent: d2 has more columns than d1");
  check_enumeration_guard(n, k, limit);
  std::vector<BigCount> deleted_in(n, 0);
  BigCount consistent = 0;
  std::vector<std::uint8_t> used(n);
  for_each_subset(n, k, [&](const std::vector<std::size_t>& kept) {
    for (std::size_t t = 0; t < k; ++t) {
      if (!columns_equal(d1, kept[t], d2, t)) return;
    }
    ++consistent;
    std::fill(used.begin(), used.end(), 0);
    for (std::size_t j : kept) used[j] = 1;
    for (std::size_t j = 0; j < n; ++j) {
      if (!used[j]) ++deleted_in[j];
    }
  });
  if (consistent == 0) throw InconsistencyError("batch is inconsistent: no deletion pattern maps d1 onto d2");
  PosteriorVector out(n);
  for (std::size_t j = 0; j < n; ++j) out[j] = Posterior{deleted_in[j], consistent};
  return out;
}

DetectionEstimate empirical_detection_probability(const Distribution& dist, std::size_t n, std::size_t batch,
                                                  double delta, std::size_t trials, double epsilon,
                                                  std::uint64_t rng_seed, std::size_t threads) {
  if (trials == 0) throw ArgumentError("need at least one trial");
  if (batch == 0 || n == 0) throw ArgumentError("need a batch of at least one row and at least one column");
  struct TrialCounts {
    std::uint64_t detected = 0;
    std::uint64_t deleted = 0;
  };
  std::vector<TrialCounts> per_trial(trials);
  parallel_for(trials, threads, [&](std::size_t trial) {
    const std::uint64_t seed = split_seed(rng_seed, trial);
    SeedBatch sb;
    sb.d1 = sample_database(dist, batch, n, seed);
    const auto exp = apply_deletion_channel(sb.d1, delta, 0.0, seed);
    sb.d2 = delete_columns(sb.d1, exp.deletion.flags);
    const auto verdicts = detect_f(sb, dist, epsilon);
    TrialCounts counts;
    for (std::size_t j = 0; j < n; ++j) {
      if (!exp.deletion.flags[j]) continue;
      ++counts.deleted;
      if (verdicts[j] == Verdict::kDeleted) ++counts.detected;
    }
    per_trial[trial] = counts;
  });

  DetectionEstimate est;
  for (const auto& c : per_trial) {
    est.detected += c.detected;
    est.deleted += c.deleted;
  }
  if (est.deleted == 0) {
    throw InconsistencyError("no column was deleted in any trial; the detection probability is undefined");
  }
  est.estimate = static_cast<double>(est.detected) / static_cast<double>(est.deleted);
  est.ci = wilson_interval(est.detected, est.deleted);
  return est;
}

void write_verdicts_csv(std::ostream& out, const std::vector<Verdict>& verdicts, const PosteriorVector& posteriors) {
  if (verdicts.size() != posteriors.size()) throw ArgumentError("verdict and posterior vectors differ in length");
  out << "index,verdict,numerator,denominator\n";
  for (std::size_t j = 0; j < verdicts.size(); ++j) {
    out << j << ',' << verdict_name(verdicts[j]) << ',' << posteriors[j].numerator.str() << ','
        << posteriors[j].denominator.str() << '\n';
  }
}

}  // namespace dbmatch::detector
