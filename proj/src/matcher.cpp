#include "dbmatch/matcher.hpp"

#include <bit>
#include <cmath>

#include "dbmatch/errors.hpp"
#include "dbmatch/infotheory.hpp"
#include "dbmatch/parallel.hpp"

namespace dbmatch::matcher {

namespace {

std::vector<std::uint8_t> keep_mask(std::size_t n, std::span<const std::size_t> detected, std::size_t& removed) {
  std::vector<std::uint8_t> keep(n, 1);
  removed = 0;
  for (std::size_t j : detected) {
    if (j >= n) {
      throw ArgumentError("detected column index " + std::to_string(j) + " is out of range for n=" + std::to_string(n));
    }
    if (keep[j]) {
      keep[j] = 0;
      ++removed;
    }
  }
  return keep;
}

}  // namespace

MatcherConfig default_config(const Distribution& dist) {
  MatcherConfig cfg;
  cfg.epsilon = 0.1 * info::entropy(dist);
  return cfg;
}

const char* outcome_name(OutcomeKind kind) noexcept {
  switch (kind) {
    case OutcomeKind::kMatched:
      return "matched";
    case OutcomeKind::kErrorNoCandidate:
      return "error_no_candidate";
    case OutcomeKind::kErrorCollision:
      return "error_collision";
    case OutcomeKind::kErrorAtypical:
      return "error_atypical";
    case OutcomeKind::kErrorThreshold:
      return "error_threshold";
  }
  return "unknown";
}

bool is_subsequence(std::span<const Symbol> y, std::span<const Symbol> x) {
  std::size_t t = 0;
  for (std::size_t i = 0; i < x.size() && t < y.size(); ++i) {
    if (x[i] == y[t]) ++t;
  }
  return t == y.size();
}

PreparedCandidates::PreparedCandidates(const Database& c1, std::span<const std::size_t> detected,
                                       const Distribution& dist, double epsilon)
    : rows_(c1.rows(), 0) {
  if (epsilon < 0.0) throw ArgumentError("typicality slack must be nonnegative");
  const auto keep = keep_mask(c1.cols(), detected, detected_count_);
  rows_ = kernels::InterleavedRows(c1.rows(), c1.cols() - detected_count_);
  typical_.assign(c1.rows(), 0);
  typical_lanes_.assign(rows_.blocks(), 0);

  std::vector<std::uint32_t> counts(dist.alphabet_size());
  for (std::size_t i = 0; i < c1.rows(); ++i) {
    const auto row = c1.row(i);
    rows_.set_row(i, restrict_row(row, keep));
    std::fill(counts.begin(), counts.end(), 0u);
    kernels::masked_histogram(row, keep, counts);
    // Symbols outside the distribution's alphabet make the row atypical.
    std::uint32_t seen = 0;
    for (auto c : counts) seen += c;
    const bool typical = seen == rows_.length() && info::is_typical_counts(counts, dist, epsilon);
    typical_[i] = typical ? 1 : 0;
    if (typical) typical_lanes_[i / kernels::kLanes] |= 1u << (i % kernels::kLanes);
  }
}

MatchOutcome PreparedCandidates::match(std::span<const Symbol> y, const MatcherConfig& cfg,
                                       std::span<const std::uint8_t> excluded) const {
  const std::size_t length = rows_.length();
  if (y.size() > length) {
    throw ArgumentError("C2 row of length " + std::to_string(y.size()) + " is longer than the " +
                        std::to_string(length) + " undetected C1 columns");
  }
  if (!excluded.empty() && excluded.size() != rows()) {
    throw ArgumentError("exclusion mask size differs from the C1 row count");
  }
  if ((cfg.min_retained && y.size() < *cfg.min_retained) ||
      (cfg.min_detected && detected_count_ < *cfg.min_detected)) {
    return MatchOutcome::error(OutcomeKind::kErrorThreshold);
  }

  const kernels::Pattern pattern(y);
  bool any_contains = false;
  std::size_t found = 0;
  std::size_t first = 0;
  for (std::size_t b = 0; b < rows_.blocks(); ++b) {
    std::uint32_t live = rows_.lane_mask(b);
    if (!excluded.empty()) {
      for (std::size_t lane = 0; lane < kernels::kLanes; ++lane) {
        const std::size_t i = b * kernels::kLanes + lane;
        if (i < excluded.size() && excluded[i]) live &= ~(1u << lane);
      }
    }
    if (live == 0) continue;
    const std::uint32_t contains = kernels::contains_block(pattern, rows_.block(b), length) & live;
    if (contains == 0) continue;
    any_contains = true;
    std::uint32_t candidates = contains & typical_lanes_[b];
    while (candidates != 0) {
      const auto lane = static_cast<std::size_t>(std::countr_zero(candidates));
      candidates &= candidates - 1;
      if (++found == 1) {
        first = b * kernels::kLanes + lane;
      } else {
        return MatchOutcome::error(OutcomeKind::kErrorCollision);
      }
    }
  }
  if (found == 1) return MatchOutcome::matched(first);
  return MatchOutcome::error(any_contains ? OutcomeKind::kErrorAtypical : OutcomeKind::kErrorNoCandidate);
}

MatchOutcome match_row(std::span<const Symbol> y, const Database& c1, std::span<const std::size_t> detected,
                       const MatcherConfig& cfg, const Distribution& dist) {
  return PreparedCandidates(c1, detected, dist, cfg.epsilon).match(y, cfg);
}

MatchResult match_all(const Database& c1, const Database& c2, std::span<const std::size_t> detected,
                      const MatcherConfig& cfg, const Distribution& dist, std::size_t threads) {
  if ((cfg.min_retained && *cfg.min_retained > c1.cols()) || (cfg.min_detected && *cfg.min_detected > c1.cols())) {
    throw ArgumentError("matcher thresholds must not exceed n");
  }
  const PreparedCandidates prepared(c1, detected, dist, cfg.epsilon);
  if (c2.cols() > prepared.restricted_length()) {
    throw ArgumentError("C2 has more columns than C1 has undetected columns");
  }
  MatchResult result;
  result.outcomes.resize(c2.rows());
  result.estimated.resize(c2.rows());
  parallel_for(c2.rows(), threads, [&](std::size_t j) {
    const auto outcome = prepared.match(c2.row(j), cfg);
    result.outcomes[j] = outcome;
    if (outcome.is_match()) result.estimated[j] = outcome.row;
  });
  return result;
}

MatchResult match_all(const DeletionExperiment& exp, const MatcherConfig& cfg, const Distribution& dist,
                      std::size_t threads) {
  const auto detected = exp.detection.detected_indices();
  return match_all(exp.c1, exp.c2, detected, cfg, dist, threads);
}

std::size_t mismatch_count(std::span<const MatchOutcome> outcomes, const Labeling& truth) {
  if (outcomes.size() != truth.size()) {
    throw ArgumentError("outcome count differs from the labeling size");
  }
  std::size_t wrong = 0;
  for (std::size_t j = 0; j < outcomes.size(); ++j) {
    if (!outcomes[j].is_match() || outcomes[j].row != truth.inverse(j)) ++wrong;
  }
  return wrong;
}

double mismatch_rate(std::span<const MatchOutcome> outcomes, const Labeling& truth) {
  const std::size_t wrong = mismatch_count(outcomes, truth);
  return outcomes.empty() ? 0.0 : static_cast<double>(wrong) / static_cast<double>(outcomes.size());
}

double candidate_probability(std::span<const Symbol> y, std::size_t length, const Distribution& dist,
                             double epsilon, std::size_t max_states) {
  const std::size_t k = y.size();
  if (k > length) return 0.0;
  const auto probs = dist.probabilities();
  const std::size_t q = dist.alphabet_size();

  if (dist.is_uniform()) {
    // Every sequence over a uniform alphabet has surprisal rate exactly H.
    std::vector<double> prob(k + 1, 0.0);
    prob[0] = 1.0;
    for (std::size_t pos = 0; pos < length; ++pos) {
      for (std::size_t t = std::min(k, pos + 1); t-- > 0;) {
        if (t == k) continue;
        const double advance = prob[t] * probs[y[t]];
        prob[t + 1] += advance;
        prob[t] -= advance;
      }
    }
    return prob[k];
  }

  // Histogram of symbols 0..q-2; the last count is implied by the position.
  const std::size_t radix = length + 1;
  std::size_t types = 1;
  std::vector<std::size_t> stride(q, 0);
  for (std::size_t s = 0; s + 1 < q; ++s) {
    stride[s] = types;
    if (types > max_states / radix) throw GuardError("candidate probability state space exceeds the guard");
    types *= radix;
  }
  if (types > max_states / (k + 1)) throw GuardError("candidate probability state space exceeds the guard");
  const std::size_t states = types * (k + 1);

  std::vector<double> cur(states, 0.0);
  std::vector<double> next(states, 0.0);
  cur[0] = 1.0;
  for (std::size_t pos = 0; pos < length; ++pos) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t t = 0; t <= k; ++t) {
      const double* from = cur.data() + t * types;
      for (std::size_t type = 0; type < types; ++type) {
        const double mass = from[type];
        if (mass == 0.0) continue;
        for (std::size_t s = 0; s < q; ++s) {
          // Zero-probability symbols can only produce atypical sequences.
          if (probs[s] == 0.0) continue;
          const std::size_t nt = (t < k && y[t] == s) ? t + 1 : t;
          next[nt * types + type + stride[s]] += mass * probs[s];
        }
      }
    }
    std::swap(cur, next);
  }

  double total = 0.0;
  std::vector<std::uint32_t> counts(q);
  const double* done = cur.data() + k * types;
  for (std::size_t type = 0; type < types; ++type) {
    if (done[type] == 0.0) continue;
    std::size_t rest = type;
    std::size_t used = 0;
    for (std::size_t s = 0; s + 1 < q; ++s) {
      counts[s] = static_cast<std::uint32_t>(rest % radix);
      rest /= radix;
      used += counts[s];
    }
    if (used > length) continue;
    counts[q - 1] = static_cast<std::uint32_t>(length - used);
    if (info::is_typical_counts(counts, dist, epsilon)) total += done[type];
  }
  return total;
}

}  // namespace dbmatch::matcher
