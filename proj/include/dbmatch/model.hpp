#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dbmatch/rng.hpp"

namespace dbmatch {

/// Alphabet symbols are stored as byte indices, so q is limited to 256.
using Symbol = std::uint8_t;
inline constexpr std::size_t kMaxAlphabet = 256;

/// Finite-alphabet probability mass function.
class Distribution {
 public:
  /// Throws ConfigError unless q >= 2, q <= 256, every entry is finite and
  /// nonnegative, and the entries sum to 1 within 1e-12.
  explicit Distribution(std::vector<double> probabilities);

  static Distribution bernoulli(double p_one);
  static Distribution uniform(std::size_t q);

  std::size_t alphabet_size() const noexcept { return probabilities_.size(); }
  std::span<const double> probabilities() const noexcept { return probabilities_; }
  double probability(Symbol s) const noexcept { return probabilities_[s]; }

  /// -log2 p(s) per symbol; +inf for zero-probability symbols.
  std::span<const double> surprisal() const noexcept { return surprisal_; }
  bool is_uniform() const noexcept { return uniform_; }

  /// Inverse-CDF sampling from one uniform variate.
  Symbol sample(Rng& rng) const;

  bool operator==(const Distribution& other) const { return probabilities_ == other.probabilities_; }

 private:
  std::vector<double> probabilities_;
  std::vector<double> cumulative_;
  std::vector<double> surprisal_;
  bool uniform_ = false;
};

/// Row-major m x n matrix of symbol indices. Rows are users, columns are
/// attributes. Zero-sized dimensions are allowed (empty batches, fully
/// deleted databases).
class Database {
 public:
  Database() = default;
  /// Throws ArgumentError if data.size() != m*n or any entry is >= q.
  Database(std::size_t m, std::size_t n, std::size_t q, std::vector<Symbol> data);

  std::size_t rows() const noexcept { return m_; }
  std::size_t cols() const noexcept { return n_; }
  std::size_t alphabet_size() const noexcept { return q_; }

  std::span<const Symbol> row(std::size_t i) const noexcept { return {data_.data() + i * n_, n_}; }
  Symbol at(std::size_t i, std::size_t j) const noexcept { return data_[i * n_ + j]; }
  std::span<const Symbol> data() const noexcept { return data_; }

  /// Column j as a contiguous vector (length rows()).
  std::vector<Symbol> column(std::size_t j) const;

  bool operator==(const Database&) const = default;

 private:
  std::size_t m_ = 0;
  std::size_t n_ = 0;
  std::size_t q_ = 2;
  std::vector<Symbol> data_;
};

/// Columnwise deletion flags: flags[j] == 1 means column j is erased from
/// every row.
struct DeletionPattern {
  std::vector<std::uint8_t> flags;
  double delta = 0.0;

  std::size_t size() const noexcept { return flags.size(); }
  std::size_t deleted_count() const noexcept;
  std::size_t retained_count() const noexcept { return size() - deleted_count(); }
  std::vector<std::size_t> deleted_indices() const;
  bool operator==(const DeletionPattern&) const = default;
};

/// One-sided side information: flags[j] == 1 only at deleted columns.
struct DetectionPattern {
  std::vector<std::uint8_t> flags;
  double alpha = 0.0;

  std::size_t detected_count() const noexcept;
  std::vector<std::size_t> detected_indices() const;
  bool operator==(const DetectionPattern&) const = default;
};

/// Permutation of [0, m): C1 row i appears as C2 row perm[i].
class Labeling {
 public:
  Labeling() = default;
  /// Throws ArgumentError unless perm is a bijection on [0, perm.size()).
  explicit Labeling(std::vector<std::size_t> perm);

  static Labeling identity(std::size_t m);

  std::size_t size() const noexcept { return perm_.size(); }
  std::size_t forward(std::size_t c1_row) const noexcept { return perm_[c1_row]; }
  std::size_t inverse(std::size_t c2_row) const noexcept { return inverse_[c2_row]; }
  std::span<const std::size_t> permutation() const noexcept { return perm_; }

  bool operator==(const Labeling& other) const { return perm_ == other.perm_; }

 private:
  std::vector<std::size_t> perm_;
  std::vector<std::size_t> inverse_;
};

/// Ground truth of one channel realization.
struct DeletionExperiment {
  Database c1;
  Database c2;
  Labeling labeling;
  DeletionPattern deletion;
  DetectionPattern detection;
  std::uint64_t master_seed = 0;

  bool operator==(const DeletionExperiment&) const = default;
};

/// B correctly matched row pairs; row t of d2 is row t of d1 with the
/// deleted columns removed. c1_rows[t] is the source row in C1.
struct SeedBatch {
  Database d1;
  Database d2;
  std::vector<std::size_t> c1_rows;

  std::size_t batch_size() const noexcept { return d1.rows(); }
};

/// Row `row` restricted to columns where keep[j] != 0, order preserved.
std::vector<Symbol> restrict_row(std::span<const Symbol> row, std::span<const std::uint8_t> keep);

/// Removes columns with flags[j] != 0 from every row.
Database delete_columns(const Database& db, std::span<const std::uint8_t> flags);

/// i.i.d. m x n database; a pure function of (dist, m, n, rng_seed).
/// Throws ArgumentError if m or n is zero.
Database sample_database(const Distribution& dist, std::size_t m, std::size_t n, std::uint64_t rng_seed);

/// Samples D ~ Bern(delta)^n, A_j ~ Bern(alpha) on deleted columns, a
/// uniform labeling, and builds C2. Deletion, detection and labeling use
/// independent streams of rng_seed, so changing alpha does not change D or
/// the labeling. Throws ArgumentError outside 0 <= delta < 1, 0 <= alpha <= 1.
DeletionExperiment apply_deletion_channel(const Database& c1, double delta, double alpha,
                                          std::uint64_t rng_seed);

/// B rows sampled without replacement, paired through the true labeling and
/// ordered by their C2 index. Throws ArgumentError if batch_size > m.
SeedBatch extract_seed_batch(const DeletionExperiment& exp, std::size_t batch_size, std::uint64_t rng_seed);

/// Checks every structural invariant of an experiment; returns a description
/// of the first violation or an empty string.
std::string validate_experiment(const DeletionExperiment& exp);

}  // namespace dbmatch
