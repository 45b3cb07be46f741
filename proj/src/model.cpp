#include "dbmatch/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "dbmatch/errors.hpp"

namespace dbmatch {

namespace {

constexpr double kSumTolerance = 1e-12;

}  // namespace

Distribution::Distribution(std::vector<double> probabilities) : probabilities_(std::move(probabilities)) {
  const std::size_t q = probabilities_.size();
  if (q < 2) {
    throw ConfigError("distribution needs an alphabet of at least 2 symbols, got " + std::to_string(q));
  }
  if (q > kMaxAlphabet) {
    throw ConfigError("alphabet size " + std::to_string(q) + " exceeds the supported maximum of 256");
  }
  double sum = 0.0;
  for (double p : probabilities_) {
    if (!std::isfinite(p) || p < 0.0) {
      throw ConfigError("distribution entries must be finite and nonnegative");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kSumTolerance) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "distribution must sum to 1, sums to " << sum;
    throw ConfigError(msg.str());
  }

  cumulative_.resize(q);
  surprisal_.resize(q);
  double acc = 0.0;
  for (std::size_t s = 0; s < q; ++s) {
    acc += probabilities_[s];
    cumulative_[s] = acc;
    surprisal_[s] = probabilities_[s] > 0.0 ? -std::log2(probabilities_[s])
                                            : std::numeric_limits<double>::infinity();
  }
  uniform_ = std::all_of(probabilities_.begin(), probabilities_.end(),
                         [&](double p) { return p == probabilities_.front(); });
}

Distribution Distribution::bernoulli(double p_one) {
  if (!(p_one >= 0.0 && p_one <= 1.0)) {
    throw ConfigError("Bernoulli parameter must lie in [0, 1]");
  }
  return Distribution({1.0 - p_one, p_one});
}

Distribution Distribution::uniform(std::size_t q) {
  if (q == 0) {
    throw ConfigError("alphabet size must be positive");
  }
  return Distribution(std::vector<double>(q, 1.0 / static_cast<double>(q)));
}

Symbol Distribution::sample(Rng& rng) const {
  const double u = rng.uniform01() * cumulative_.back();
  // First symbol whose cumulative mass exceeds u; zero-mass symbols are
  // never selected because their cumulative value equals the previous one.
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  if (it == cumulative_.end()) {
    // Rounding in the cumulative sum; fall back to the last positive symbol.
    std::size_t s = probabilities_.size() - 1;
    while (s > 0 && probabilities_[s] == 0.0) --s;
    return static_cast<Symbol>(s);
  }
  return static_cast<Symbol>(it - cumulative_.begin());
}

Database::Database(std::size_t m, std::size_t n, std::size_t q, std::vector<Symbol> data)
    : m_(m), n_(n), q_(q), data_(std::move(data)) {
  if (q_ < 1 || q_ > kMaxAlphabet) {
    throw ArgumentError("database alphabet size must be in [1, 256]");
  }
  if (data_.size() != m_ * n_) {
    throw ArgumentError("database data has " + std::to_string(data_.size()) + " entries, expected " +
                        std::to_string(m_ * n_));
  }
  for (Symbol s : data_) {
    if (s >= q_) {
      throw ArgumentError("database entry " + std::to_string(s) + " is not a symbol index below q=" +
                          std::to_string(q_));
    }
  }
}

std::vector<Symbol> Database::column(std::size_t j) const {
  std::vector<Symbol> out(m_);
  for (std::size_t i = 0; i < m_; ++i) out[i] = at(i, j);
  return out;
}

std::size_t DeletionPattern::deleted_count() const noexcept {
  return static_cast<std::size_t>(std::count_if(flags.begin(), flags.end(), [](auto f) { return f != 0; }));
}

std::vector<std::size_t> DeletionPattern::deleted_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < flags.size(); ++j) {
    if (flags[j]) out.push_back(j);
  }
  return out;
}

std::size_t DetectionPattern::detected_count() const noexcept {
  return static_cast<std::size_t>(std::count_if(flags.begin(), flags.end(), [](auto f) { return f != 0; }));
}

std::vector<std::size_t> DetectionPattern::detected_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < flags.size(); ++j) {
    if (flags[j]) out.push_back(j);
  }
  return out;
}

Labeling::Labeling(std::vector<std::size_t> perm) : perm_(std::move(perm)), inverse_(perm_.size(), perm_.size()) {
  for (std::size_t i = 0; i < perm_.size(); ++i) {
    const std::size_t j = perm_[i];
    if (j >= perm_.size() || inverse_[j] != perm_.size()) {
      throw ArgumentError("labeling is not a permutation");
    }
    inverse_[j] = i;
  }
}

Labeling Labeling::identity(std::size_t m) {
  std::vector<std::size_t> perm(m);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  return Labeling(std::move(perm));
}

std::vector<Symbol> restrict_row(std::span<const Symbol> row, std::span<const std::uint8_t> keep) {
  std::vector<Symbol> out;
  out.reserve(row.size());
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (keep[j]) out.push_back(row[j]);
  }
  return out;
}

Database delete_columns(const Database& db, std::span<const std::uint8_t> flags) {
  if (flags.size() != db.cols()) {
    throw ArgumentError("deletion flags length does not match the column count");
  }
  const std::size_t kept = static_cast<std::size_t>(std::count(flags.begin(), flags.end(), std::uint8_t{0}));
  std::vector<Symbol> data;
  data.reserve(db.rows() * kept);
  for (std::size_t i = 0; i < db.rows(); ++i) {
    const auto row = db.row(i);
    for (std::size_t j = 0; j < db.cols(); ++j) {
      if (!flags[j]) data.push_back(row[j]);
    }
  }
  return Database(db.rows(), kept, db.alphabet_size(), std::move(data));
}

Database sample_database(const Distribution& dist, std::size_t m, std::size_t n, std::uint64_t rng_seed) {
  if (m == 0 || n == 0) {
    throw ArgumentError("sample_database requires m >= 1 and n >= 1");
  }
  Rng rng(split_seed(rng_seed, Stream::kDatabase));
  std::vector<Symbol> data(m * n);
  for (auto& s : data) s = dist.sample(rng);
  return Database(m, n, dist.alphabet_size(), std::move(data));
}

DeletionExperiment apply_deletion_channel(const Database& c1, double delta, double alpha, std::uint64_t rng_seed) {
  if (!(delta >= 0.0 && delta < 1.0)) {
    throw ArgumentError("deletion probability must satisfy 0 <= delta < 1");
  }
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw ArgumentError("detection probability must satisfy 0 <= alpha <= 1");
  }
  const std::size_t n = c1.cols();
  const std::size_t m = c1.rows();

  DeletionExperiment exp;
  exp.master_seed = rng_seed;
  exp.deletion.delta = delta;
  exp.deletion.flags.assign(n, 0);
  exp.detection.alpha = alpha;
  exp.detection.flags.assign(n, 0);

  Rng deletion_rng(split_seed(rng_seed, Stream::kDeletion));
  for (auto& f : exp.deletion.flags) f = deletion_rng.bernoulli(delta) ? 1 : 0;

  // One variate per column keeps the detection draw for column j independent
  // of which other columns were deleted.
  Rng detection_rng(split_seed(rng_seed, Stream::kDetection));
  for (std::size_t j = 0; j < n; ++j) {
    const bool hit = detection_rng.bernoulli(alpha);
    exp.detection.flags[j] = (exp.deletion.flags[j] && hit) ? 1 : 0;
  }

  // Fisher-Yates.
  std::vector<std::size_t> perm(m);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng labeling_rng(split_seed(rng_seed, Stream::kLabeling));
  for (std::size_t i = m; i > 1; --i) {
    const std::size_t r = labeling_rng.below(i);
    std::swap(perm[i - 1], perm[r]);
  }
  exp.labeling = Labeling(std::move(perm));

  const Database deleted = delete_columns(c1, exp.deletion.flags);
  const std::size_t k = deleted.cols();
  std::vector<Symbol> c2(m * k);
  for (std::size_t i = 0; i < m; ++i) {
    const auto src = deleted.row(i);
    std::copy(src.begin(), src.end(), c2.begin() + static_cast<std::ptrdiff_t>(exp.labeling.forward(i) * k));
  }
  exp.c1 = c1;
  exp.c2 = Database(m, k, c1.alphabet_size(), std::move(c2));
  return exp;
}

SeedBatch extract_seed_batch(const DeletionExperiment& exp, std::size_t batch_size, std::uint64_t rng_seed) {
  const std::size_t m = exp.c1.rows();
  if (batch_size > m) {
    throw ArgumentError("batch size " + std::to_string(batch_size) + " exceeds the row count " + std::to_string(m));
  }
  // Partial Fisher-Yates over C1 row indices.
  std::vector<std::size_t> pool(m);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  Rng rng(split_seed(rng_seed, Stream::kSeedBatch));
  for (std::size_t t = 0; t < batch_size; ++t) {
    const std::size_t r = t + rng.below(m - t);
    std::swap(pool[t], pool[r]);
  }
  std::vector<std::size_t> chosen(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(batch_size));
  std::sort(chosen.begin(), chosen.end(), [&](std::size_t a, std::size_t b) {
    return exp.labeling.forward(a) < exp.labeling.forward(b);
  });

  const std::size_t n = exp.c1.cols();
  const std::size_t k = exp.c2.cols();
  std::vector<Symbol> d1;
  std::vector<Symbol> d2;
  d1.reserve(batch_size * n);
  d2.reserve(batch_size * k);
  for (std::size_t i : chosen) {
    const auto r1 = exp.c1.row(i);
    const auto r2 = exp.c2.row(exp.labeling.forward(i));
    d1.insert(d1.end(), r1.begin(), r1.end());
    d2.insert(d2.end(), r2.begin(), r2.end());
  }
  SeedBatch batch;
  batch.d1 = Database(batch_size, n, exp.c1.alphabet_size(), std::move(d1));
  batch.d2 = Database(batch_size, k, exp.c2.alphabet_size(), std::move(d2));
  batch.c1_rows = std::move(chosen);
  return batch;
}

std::string validate_experiment(const DeletionExperiment& exp) {
  const std::size_t m = exp.c1.rows();
  const std::size_t n = exp.c1.cols();
  if (exp.deletion.flags.size() != n) return "deletion pattern length differs from n";
  if (exp.detection.flags.size() != n) return "detection pattern length differs from n";
  if (exp.labeling.size() != m) return "labeling size differs from m";
  if (exp.c2.rows() != m) return "c2 row count differs from m";
  if (exp.c2.cols() != exp.deletion.retained_count()) return "c2 column count differs from n - sum(D)";
  for (std::size_t j = 0; j < n; ++j) {
    if (exp.detection.flags[j] && !exp.deletion.flags[j]) {
      return "detection flag set at retained column " + std::to_string(j);
    }
  }
  std::vector<std::uint8_t> keep(n);
  for (std::size_t j = 0; j < n; ++j) keep[j] = exp.deletion.flags[j] ? 0 : 1;
  for (std::size_t i = 0; i < m; ++i) {
    const auto expected = restrict_row(exp.c1.row(i), keep);
    const auto actual = exp.c2.row(exp.labeling.forward(i));
    if (!std::equal(expected.begin(), expected.end(), actual.begin(), actual.end())) {
      return "c2 row " + std::to_string(exp.labeling.forward(i)) + " is not c1 row " + std::to_string(i) +
             " with deleted columns removed";
    }
  }
  return {};
}

}  // namespace dbmatch
