#include <cmath>
#include <sstream>

#include "dbmatch/errors.hpp"
#include "dbmatch/harness.hpp"
#include "dbmatch/kernels.hpp"
#include "dbmatch/matcher.hpp"
#include "dbmatch/parallel.hpp"

namespace dbmatch::harness {

namespace {

struct PointSpec {
  std::size_t n = 0;
  double rows = 0.0;
  RowModel model = RowModel::kExplicit;
  double alpha = 0.0;
  bool seeded = false;
  std::size_t batch = 0;
};

struct Slack {
  matcher::MatcherConfig matcher;
  double detect_epsilon = 0.0;
};

Slack resolve_slack(const ExperimentConfig& cfg) {
  Slack s;
  s.matcher = matcher::default_config(cfg.dist);
  if (cfg.epsilon) s.matcher.epsilon = *cfg.epsilon;
  if (s.matcher.epsilon < 0.0) throw ConfigError("epsilon must be nonnegative");
  s.matcher.min_retained = cfg.min_retained;
  s.matcher.min_detected = cfg.min_detected;
  s.detect_epsilon = cfg.detect_epsilon.value_or(s.matcher.epsilon);
  if (s.detect_epsilon < 0.0) throw ConfigError("detect epsilon must be nonnegative");
  return s;
}

std::vector<std::size_t> deleted_verdict_columns(const std::vector<detector::Verdict>& verdicts) {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < verdicts.size(); ++j) {
    if (verdicts[j] == detector::Verdict::kDeleted) out.push_back(j);
  }
  return out;
}

TrialRecord run_explicit_trial(const ExperimentConfig& cfg, const PointSpec& spec, const Slack& slack,
                               std::uint64_t seed) {
  const auto m = static_cast<std::size_t>(spec.rows);
  const Database c1 = sample_database(cfg.dist, m, spec.n, seed);
  const DeletionExperiment exp = apply_deletion_channel(c1, cfg.delta, spec.alpha, seed);

  TrialRecord rec;
  rec.seed = seed;
  rec.deleted = exp.deletion.deleted_count();

  std::vector<std::size_t> detected;
  std::vector<std::uint8_t> excluded;
  std::vector<std::uint8_t> skip_c2(m, 0);
  if (spec.seeded && spec.batch > 0) {
    const SeedBatch batch = extract_seed_batch(exp, spec.batch, seed);
    detected = deleted_verdict_columns(detector::detect_f(batch, cfg.dist, slack.detect_epsilon));
    excluded.assign(m, 0);
    for (std::size_t i : batch.c1_rows) {
      excluded[i] = 1;
      skip_c2[exp.labeling.forward(i)] = 1;
    }
  } else {
    detected = exp.detection.detected_indices();
  }
  rec.detected = detected.size();

  const matcher::PreparedCandidates candidates(c1, detected, cfg.dist, slack.matcher.epsilon);
  for (std::size_t j = 0; j < m; ++j) {
    if (skip_c2[j]) continue;
    const auto outcome = candidates.match(exp.c2.row(j), slack.matcher, excluded);
    ++rec.rows;
    if (!outcome.is_match() || outcome.row != exp.labeling.inverse(j)) ++rec.mismatches;
  }
  return rec;
}

TrialRecord run_implicit_trial(const ExperimentConfig& cfg, const PointSpec& spec, const Slack& slack,
                               std::uint64_t seed) {
  const std::size_t n = spec.n;
  const Database target = sample_database(cfg.dist, 1, n, split_seed(seed, Stream::kTargetRow));
  const DeletionExperiment exp = apply_deletion_channel(target, cfg.delta, spec.alpha, seed);

  TrialRecord rec;
  rec.seed = seed;
  rec.rows = 1;
  rec.deleted = exp.deletion.deleted_count();

  std::vector<std::uint8_t> keep(n, 1);
  if (spec.seeded && spec.batch > 0) {
    const Database d1 = sample_database(cfg.dist, spec.batch, n, split_seed(seed, Stream::kSeedRows));
    const SeedBatch batch{d1, delete_columns(d1, exp.deletion.flags), {}};
    for (std::size_t j : deleted_verdict_columns(detector::detect_f(batch, cfg.dist, slack.detect_epsilon))) {
      keep[j] = 0;
      ++rec.detected;
    }
  } else {
    for (std::size_t j = 0; j < n; ++j) {
      if (exp.detection.flags[j]) {
        keep[j] = 0;
        ++rec.detected;
      }
    }
  }

  const auto y = exp.c2.row(0);
  const std::size_t length = n - rec.detected;
  if ((slack.matcher.min_retained && y.size() < *slack.matcher.min_retained) ||
      (slack.matcher.min_detected && rec.detected < *slack.matcher.min_detected)) {
    rec.mismatches = 1;
    return rec;
  }
  std::vector<std::uint32_t> counts(cfg.dist.alphabet_size(), 0);
  kernels::masked_histogram(target.row(0), keep, counts);
  if (!info::is_typical_counts(counts, cfg.dist, slack.matcher.epsilon)) {
    rec.mismatches = 1;
    return rec;
  }
  // The other rows are i.i.d. and independent of the target, so no collision
  // happens with probability (1 - p)^others.
  const double others = spec.rows - 1.0 - static_cast<double>(spec.batch);
  if (others >= 1.0) {
    const double p = matcher::candidate_probability(y, length, cfg.dist, slack.matcher.epsilon);
    const double no_collision = p >= 1.0 ? 0.0 : std::exp(others * std::log1p(-p));
    Rng rng(split_seed(seed, Stream::kCollision));
    if (rng.uniform01() >= no_collision) rec.mismatches = 1;
  }
  return rec;
}

MatchPoint run_point(const ExperimentConfig& cfg, const PointSpec& spec, std::size_t point_index,
                     std::size_t n_index, const Slack& slack) {
  MatchPoint point;
  point.n = spec.n;
  point.batch = spec.batch;
  point.rows = spec.rows;
  point.rate = cfg.rate ? *cfg.rate : std::log2(spec.rows) / static_cast<double>(spec.n);
  point.delta = cfg.delta;
  point.alpha = spec.alpha;
  point.model = spec.model;
  point.trials.resize(cfg.trials);

  parallel_for(cfg.trials, cfg.threads, [&](std::size_t trial) {
    const std::uint64_t seed = split_seed(cfg.master_seed, n_index, trial);
    TrialRecord rec = spec.model == RowModel::kExplicit ? run_explicit_trial(cfg, spec, slack, seed)
                                                         : run_implicit_trial(cfg, spec, slack, seed);
    rec.point = point_index;
    rec.trial = trial;
    point.trials[trial] = rec;
  });

  for (const auto& rec : point.trials) {
    point.rows_total += rec.rows;
    point.mismatches_total += rec.mismatches;
    point.deleted_total += rec.deleted;
    point.detected_total += rec.detected;
  }
  point.ci = wilson_interval(point.mismatches_total, point.rows_total);
  return point;
}

void check_common(const ExperimentConfig& cfg) {
  if (cfg.trials == 0) throw ConfigError("need at least one trial");
  if (cfg.n_values.empty()) throw ConfigError("need at least one column count n");
  if (!(cfg.delta >= 0.0 && cfg.delta < 1.0)) throw ConfigError("delta must satisfy 0 <= delta < 1");
  for (std::size_t n : cfg.n_values) {
    if ((cfg.min_retained && *cfg.min_retained > n) || (cfg.min_detected && *cfg.min_detected > n)) {
      throw ConfigError("matcher thresholds must not exceed n");
    }
  }
}

std::string csv_number(double v) { return std::isnan(v) ? "nan" : format_double(v); }

}  // namespace

double MatchPoint::mismatch_rate() const {
  return rows_total == 0 ? 0.0 : static_cast<double>(mismatches_total) / static_cast<double>(rows_total);
}

double MatchPoint::detected_fraction() const {
  return deleted_total == 0 ? std::nan("") : static_cast<double>(detected_total) / static_cast<double>(deleted_total);
}

std::string rates_csv(const RatesConfig& cfg) {
  const auto deltas = cfg.deltas.empty() ? parse_real_list("0:0.01:0.99") : cfg.deltas;
  std::ostringstream out;
  out << "delta,alpha,rate,regime_ok\n";
  for (double delta : deltas) {
    for (double alpha : cfg.alphas) {
      const auto r = info::achievable_rate({cfg.dist, delta, alpha});
      out << format_double(delta) << ',' << format_double(alpha) << ',' << format_double(r.rate) << ','
          << (r.regime_ok ? 1 : 0) << '\n';
    }
  }
  return out.str();
}

std::vector<MatchPoint> simulate_match(const ExperimentConfig& cfg) {
  const auto* given = std::get_if<GivenAlpha>(&cfg.side_info);
  if (given == nullptr) throw ConfigError("simulate-match needs a given detection probability alpha");
  if (!(given->alpha >= 0.0 && given->alpha <= 1.0)) throw ConfigError("alpha must lie in [0, 1]");
  check_common(cfg);
  const Slack slack = resolve_slack(cfg);

  std::vector<MatchPoint> points;
  for (std::size_t i = 0; i < cfg.n_values.size(); ++i) {
    PointSpec spec;
    spec.n = cfg.n_values[i];
    spec.model = resolve_row_model(cfg, spec.n);
    spec.rows = row_count(cfg, spec.n);
    spec.alpha = given->alpha;
    points.push_back(run_point(cfg, spec, i, i, slack));
  }
  return points;
}

std::vector<MatchPoint> run_pipeline(const ExperimentConfig& cfg) {
  const auto* seeded = std::get_if<Seeded>(&cfg.side_info);
  if (seeded == nullptr) throw ConfigError("pipeline needs seeded side information (batch sizes)");
  if (seeded->batch_sizes.empty()) throw ConfigError("need at least one batch size");
  check_common(cfg);
  const Slack slack = resolve_slack(cfg);

  std::vector<MatchPoint> points;
  for (std::size_t i = 0; i < cfg.n_values.size(); ++i) {
    for (std::size_t b = 0; b < seeded->batch_sizes.size(); ++b) {
      PointSpec spec;
      spec.n = cfg.n_values[i];
      spec.model = resolve_row_model(cfg, spec.n);
      spec.rows = row_count(cfg, spec.n);
      spec.seeded = true;
      spec.batch = seeded->batch_sizes[b];
      if (static_cast<double>(spec.batch) >= spec.rows) {
        throw ConfigError("batch size B=" + std::to_string(spec.batch) + " must be below m=" +
                          format_double(spec.rows) + " at n=" + std::to_string(spec.n));
      }
      points.push_back(run_point(cfg, spec, i * seeded->batch_sizes.size() + b, i, slack));
    }
  }
  return points;
}

std::string match_csv(const std::vector<MatchPoint>& points, std::size_t trials) {
  std::ostringstream out;
  out << "n,R,delta,alpha,trials,mismatch_rate,ci_low,ci_high\n";
  for (const auto& p : points) {
    out << p.n << ',' << format_double(p.rate) << ',' << format_double(p.delta) << ',' << format_double(p.alpha)
        << ',' << trials << ',' << format_double(p.mismatch_rate()) << ',' << format_double(p.ci.low) << ','
        << format_double(p.ci.high) << '\n';
  }
  return out.str();
}

std::string pipeline_csv(const std::vector<MatchPoint>& points) {
  std::ostringstream out;
  out << "n,B,R,delta,detected_fraction,mismatch_rate,ci_low,ci_high\n";
  for (const auto& p : points) {
    out << p.n << ',' << p.batch << ',' << format_double(p.rate) << ',' << format_double(p.delta) << ','
        << csv_number(p.detected_fraction()) << ',' << format_double(p.mismatch_rate()) << ','
        << format_double(p.ci.low) << ',' << format_double(p.ci.high) << '\n';
  }
  return out.str();
}

std::string trials_csv(const std::vector<MatchPoint>& points) {
  std::ostringstream out;
  out << "point,trial,seed,rows,mismatches\n";
  for (const auto& p : points) {
    for (const auto& t : p.trials) {
      out << t.point << ',' << t.trial << ',' << t.seed << ',' << t.rows << ',' << t.mismatches << '\n';
    }
  }
  return out.str();
}

std::vector<DetectPoint> simulate_detect(const DetectConfig& cfg) {
  if (cfg.trials == 0) throw ConfigError("need at least one trial");
  if (!(cfg.delta >= 0.0 && cfg.delta < 1.0)) throw ConfigError("delta must satisfy 0 <= delta < 1");
  if (!(cfg.epsilon >= 0.0)) throw ConfigError("epsilon must be nonnegative");
  const double h = info::entropy(cfg.dist);
  std::vector<DetectPoint> points;
  for (std::size_t i = 0; i < cfg.n_values.size(); ++i) {
    for (std::size_t j = 0; j < cfg.batch_sizes.size(); ++j) {
      DetectPoint p;
      p.n = cfg.n_values[i];
      p.batch = cfg.batch_sizes[j];
      if (p.n == 0 || p.batch == 0) throw ConfigError("detection sweeps need n >= 1 and B >= 1");
      p.seed = split_seed(cfg.master_seed, i * cfg.batch_sizes.size() + j);
      p.estimate = detector::empirical_detection_probability(cfg.dist, p.n, p.batch, cfg.delta, cfg.trials,
                                                             cfg.epsilon, p.seed, cfg.threads);
      p.bound = info::detection_probability_bound(p.n, p.batch, cfg.delta, h, cfg.epsilon);
      points.push_back(p);
    }
  }
  return points;
}

std::string detect_csv(const std::vector<DetectPoint>& points) {
  std::ostringstream out;
  out << "n,B,empirical_alpha,ci_low,ci_high,theorem2_bound,trivial\n";
  for (const auto& p : points) {
    out << p.n << ',' << p.batch << ',' << format_double(p.estimate.estimate) << ','
        << format_double(p.estimate.ci.low) << ',' << format_double(p.estimate.ci.high) << ','
        << format_double(p.bound.raw) << ',' << (p.bound.trivial() ? 1 : 0) << '\n';
  }
  return out.str();
}

}  // namespace dbmatch::harness
