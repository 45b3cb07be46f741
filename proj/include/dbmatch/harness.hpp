#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dbmatch/detector.hpp"
#include "dbmatch/infotheory.hpp"
#include "dbmatch/model.hpp"
#include "dbmatch/model_io.hpp"
#include "dbmatch/stats.hpp"

namespace dbmatch::harness {

inline constexpr const char* kVersion = "1.0.0";

/// "bern:P" (P = probability of symbol 1), "uniform:Q", or an explicit
/// comma-separated probability list. Throws ConfigError.
Distribution parse_distribution(std::string_view spec);
/// Comma-separated values or an inclusive "start:step:stop" range.
std::vector<double> parse_real_list(std::string_view spec);
std::vector<std::size_t> parse_count_list(std::string_view spec);

// ---------------------------------------------------------------- rates

struct RatesConfig {
  Distribution dist = Distribution::bernoulli(0.5);
  std::vector<double> deltas;
  std::vector<double> alphas{0.0, 0.25, 0.5, 0.75, 1.0};
};

/// Header "delta,alpha,rate,regime_ok"; rows delta-major.
std::string rates_csv(const RatesConfig& cfg);

// ------------------------------------------------------- matching sweeps

enum class RowModel {
  kAuto,
  /// Materialize all m rows of C1 and C2 and match every C2 row.
  kExplicit,
  /// Evaluate one uniformly chosen row per trial; the other rows enter only
  /// through the exact probability that one of them is a typical
  /// container of y. Needed when m = 2^{nR} is too large to store.
  kImplicit,
};

const char* row_model_name(RowModel m) noexcept;
RowModel parse_row_model(std::string_view text);

struct GivenAlpha {
  double alpha = 0.0;
};
struct Seeded {
  std::vector<std::size_t> batch_sizes{0};
};

struct ExperimentConfig {
  Distribution dist = Distribution::bernoulli(0.5);
  std::vector<std::size_t> n_values{16};
  /// Exactly one of rate / rows; m = round(2^{nR}) when the rate is given.
  std::optional<double> rate;
  std::optional<std::uint64_t> rows;
  double delta = 0.0;
  std::variant<GivenAlpha, Seeded> side_info = GivenAlpha{};
  /// Matcher typicality slack; default 0.1 H(X).
  std::optional<double> epsilon;
  /// Detector typicality slack for seeded runs; defaults to the matcher's.
  std::optional<double> detect_epsilon;
  std::optional<std::size_t> min_retained;
  std::optional<std::size_t> min_detected;
  std::size_t trials = 200;
  std::uint64_t master_seed = 1;
  std::size_t threads = 1;
  RowModel row_model = RowModel::kAuto;
  /// Desk-scale guards; allow_large lifts both.
  std::size_t max_n = 64;
  std::uint64_t max_cells = std::uint64_t{1} << 22;
  bool allow_large = false;
};

/// m as a real number (it may exceed 2^64 in the implicit model).
double row_count(const ExperimentConfig& cfg, std::size_t n);
/// Row model actually used at column count n. Throws GuardError with a
/// sizing hint when the configuration exceeds the guards.
RowModel resolve_row_model(const ExperimentConfig& cfg, std::size_t n);

struct TrialRecord {
  std::size_t point = 0;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  std::uint64_t rows = 0;        ///< C2 rows evaluated
  std::uint64_t mismatches = 0;  ///< rows not matched to their true C1 row
  std::uint64_t deleted = 0;     ///< truly deleted columns
  std::uint64_t detected = 0;    ///< columns in the detected set
};

struct MatchPoint {
  std::size_t n = 0;
  std::size_t batch = 0;
  double rate = 0.0;
  double rows = 0.0;
  double delta = 0.0;
  double alpha = 0.0;
  RowModel model = RowModel::kExplicit;
  std::uint64_t rows_total = 0;
  std::uint64_t mismatches_total = 0;
  std::uint64_t deleted_total = 0;
  std::uint64_t detected_total = 0;
  Interval ci;
  std::vector<TrialRecord> trials;

  double mismatch_rate() const;
  double detected_fraction() const;
};

/// Given-alpha sweep over n_values. Trial t at n_values[i] uses seed
/// split_seed(master_seed, i, t). Throws ConfigError unless the side
/// information is GivenAlpha.
std::vector<MatchPoint> simulate_match(const ExperimentConfig& cfg);

/// Seeded sweep over n_values x batch_sizes: B seed rows -> detect_f ->
/// detected set = Deleted verdicts -> match the remaining m - B rows
/// against the remaining C1 rows. The trial seed does not depend on B, so
/// all batch sizes see the same databases. With B = 0 no detection is run,
/// which makes the run identical to simulate_match with alpha = 0.
std::vector<MatchPoint> run_pipeline(const ExperimentConfig& cfg);

/// "n,R,delta,alpha,trials,mismatch_rate,ci_low,ci_high"
std::string match_csv(const std::vector<MatchPoint>& points, std::size_t trials);
/// "n,B,R,delta,detected_fraction,mismatch_rate,ci_low,ci_high"
std::string pipeline_csv(const std::vector<MatchPoint>& points);
/// "point,trial,seed,rows,mismatches"
std::string trials_csv(const std::vector<MatchPoint>& points);

// ------------------------------------------------------- detection sweep

struct DetectConfig {
  Distribution dist = Distribution::bernoulli(0.5);
  std::vector<std::size_t> n_values{16, 64, 256};
  std::vector<std::size_t> batch_sizes{8, 16, 24};
  double delta = 0.5;
  double epsilon = 0.05;
  std::size_t trials = 200;
  std::uint64_t master_seed = 1;
  std::size_t threads = 1;
};

struct DetectPoint {
  std::size_t n = 0;
  std::size_t batch = 0;
  std::uint64_t seed = 0;
  detector::DetectionEstimate estimate;
  info::DetectionBound bound;
};

/// Grid point (i, j) = (n_values[i], batch_sizes[j]) uses
/// split_seed(master_seed, i * |batch_sizes| + j) as its seed.
std::vector<DetectPoint> simulate_detect(const DetectConfig& cfg);
/// "n,B,empirical_alpha,ci_low,ci_high,theorem2_bound,trivial"
std::string detect_csv(const std::vector<DetectPoint>& points);

// -------------------------------------------------------------- manifest

std::string sha256_hex(std::string_view bytes);

/// Key-value run manifest: command, tool version, resolved configuration,
/// seeds, SIMD backend, wall clock, and the SHA-256 of every output.
struct RunManifest {
  std::string command;
  KeyValues config;
  KeyValues seeds;
  std::vector<std::pair<std::string, std::string>> outputs;  ///< (path, content)
  double wall_clock_seconds = 0.0;

  KeyValues to_key_values() const;
};

/// Per-trial seed lists for the manifest, one key per grid point.
KeyValues trial_seed_entries(const std::vector<MatchPoint>& points);
KeyValues trial_seed_entries(const std::vector<DetectPoint>& points, std::size_t trials);

}  // namespace dbmatch::harness
