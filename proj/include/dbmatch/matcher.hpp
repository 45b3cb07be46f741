#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dbmatch/kernels.hpp"
#include "dbmatch/model.hpp"

namespace dbmatch::matcher {

struct MatcherConfig {
  double epsilon = 0.0;
  /// Minimum retained column count k; unset disables the check.
  std::optional<std::size_t> min_retained;
  /// Minimum detected deletion count a; unset disables the check.
  std::optional<std::size_t> min_detected;
};

/// epsilon = 0.1 H(X), thresholds disabled.
MatcherConfig default_config(const Distribution& dist);

enum class OutcomeKind {
  kMatched,
  /// No C1 row contains y at all (only possible when C2 was not produced
  /// from C1 by the channel).
  kErrorNoCandidate,
  /// Two or more typical C1 rows contain y.
  kErrorCollision,
  /// Some C1 rows contain y but none of them is typical after discarding the
  /// detected columns.
  kErrorAtypical,
  /// K < k or A < a with the corresponding threshold enabled.
  kErrorThreshold,
};

const char* outcome_name(OutcomeKind kind) noexcept;

struct MatchOutcome {
  OutcomeKind kind = OutcomeKind::kErrorNoCandidate;
  std::size_t row = 0;  ///< C1 row index, meaningful only for kMatched

  static MatchOutcome matched(std::size_t row) { return {OutcomeKind::kMatched, row}; }
  static MatchOutcome error(OutcomeKind kind) { return {kind, 0}; }
  bool is_match() const noexcept { return kind == OutcomeKind::kMatched; }
  bool operator==(const MatchOutcome&) const = default;
};

/// Greedy left-to-right embedding test, O(|x|).
bool is_subsequence(std::span<const Symbol> y, std::span<const Symbol> x);

/// C1 with the detected columns removed, interleaved for the containment
/// kernel, plus the typicality verdict of every restricted row. Built once
/// per (C1, detected set) and shared read-only by all row matches.
class PreparedCandidates {
 public:
  /// Throws ArgumentError if a detected index is >= n.
  PreparedCandidates(const Database& c1, std::span<const std::size_t> detected, const Distribution& dist,
                     double epsilon);

  std::size_t rows() const noexcept { return typical_.size(); }
  std::size_t restricted_length() const noexcept { return rows_.length(); }
  std::size_t detected_count() const noexcept { return detected_count_; }
  bool typical(std::size_t row) const noexcept { return typical_[row] != 0; }

  /// Matches one C2 row. Rows with excluded[i] != 0 are never candidates;
  /// an empty span excludes nothing. Throws ArgumentError if y is longer
  /// than the restricted rows.
  MatchOutcome match(std::span<const Symbol> y, const MatcherConfig& cfg,
                     std::span<const std::uint8_t> excluded = {}) const;

 private:
  kernels::InterleavedRows rows_;
  std::size_t detected_count_ = 0;
  std::vector<std::uint8_t> typical_;
  std::vector<std::uint32_t> typical_lanes_;
};

/// Matches one C2 row y against C1 after discarding the columns in
/// `detected`: the candidates are the C1 rows whose restriction is
/// epsilon-typical (length n - |detected|) and contains y. Exactly one
/// candidate gives kMatched.
MatchOutcome match_row(std::span<const Symbol> y, const Database& c1, std::span<const std::size_t> detected,
                       const MatcherConfig& cfg, const Distribution& dist);

struct MatchResult {
  /// outcomes[j] is the result for C2 row j.
  std::vector<MatchOutcome> outcomes;
  /// estimated[j] = C1 row assigned to C2 row j, if any. Two C2 rows may be
  /// assigned the same C1 row.
  std::vector<std::optional<std::size_t>> estimated;
};

/// Matches every C2 row independently; results are ordered by C2 row
/// regardless of the worker count.
MatchResult match_all(const Database& c1, const Database& c2, std::span<const std::size_t> detected,
                      const MatcherConfig& cfg, const Distribution& dist, std::size_t threads = 1);
/// Uses the experiment's detection pattern as the detected set.
MatchResult match_all(const DeletionExperiment& exp, const MatcherConfig& cfg, const Distribution& dist,
                      std::size_t threads = 1);

/// Fraction of C2 rows whose outcome is not kMatched at the true C1 row.
/// Throws ArgumentError if the sizes differ.
double mismatch_rate(std::span<const MatchOutcome> outcomes, const Labeling& truth);
std::size_t mismatch_count(std::span<const MatchOutcome> outcomes, const Labeling& truth);

/// Probability that an i.i.d. length-`length` sequence drawn from dist is
/// epsilon-typical and contains y. Exact dynamic program over (matched
/// prefix, symbol histogram); the histogram dimension is skipped for
/// uniform distributions. Throws GuardError if the state space exceeds
/// `max_states`.
double candidate_probability(std::span<const Symbol> y, std::size_t length, const Distribution& dist,
                             double epsilon, std::size_t max_states = std::size_t{1} << 24);

}  // namespace dbmatch::matcher
