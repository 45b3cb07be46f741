// dbmatch command-line driver. See README.md for the subcommands and the
// config file keys.

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dbmatch/errors.hpp"
#include "dbmatch/harness.hpp"
#include "dbmatch/kernels.hpp"
#include "dbmatch/oracles.hpp"

using namespace dbmatch;
using namespace dbmatch::harness;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;

struct Options {
  std::string config;
  std::uint64_t seed = 1;
  std::string out;
  std::size_t trials = 200;
  std::size_t threads = 1;
  std::string simd;

  std::string dist = "bern:0.5";
  std::string n = "16";
  std::optional<double> rate;
  std::optional<std::uint64_t> rows;
  double delta = 0.0;
  std::string deltas = "0:0.01:0.99";
  std::string alphas = "0,0.25,0.5,0.75,1";
  double alpha = 0.0;
  std::string batch;
  std::optional<double> epsilon;
  std::optional<double> detect_epsilon;
  std::optional<std::size_t> min_retained;
  std::optional<std::size_t> min_detected;
  std::string row_model = "auto";
  std::size_t max_n = 64;
  std::uint64_t max_cells = std::uint64_t{1} << 22;
  bool allow_large = false;
  std::string trials_out;

  std::size_t cases = 1000;
  std::size_t max_oracle_n = 12;
  std::string inject_fault = "none";
};

// Config keys are the long option names without the leading dashes. They are
// spliced in front of the command-line arguments, so the command line wins.
std::vector<std::string> config_arguments(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::vector<std::string> args;
  for (const auto& [key, value] : read_key_values(in)) {
    if (key == "config") throw ConfigError("config files cannot include other config files");
    args.push_back("--" + key + "=" + value);
  }
  return args;
}

std::optional<std::string> find_config(const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
  }
  return std::nullopt;
}

struct Output {
  std::string path;
  std::string content;
};

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << content;
  if (!out) throw ConfigError("failed writing '" + path + "'");
}

// Writes the primary CSV (to stdout without --out) plus any side outputs, and
// the manifest next to the primary output.
void emit(const Options& opt, const std::string& command, const std::string& csv, std::vector<Output> extra,
          const KeyValues& config, const KeyValues& seeds, double seconds) {
  if (opt.out.empty()) {
    std::cout << csv;
    for (const auto& o : extra) write_file(o.path, o.content);
    return;
  }
  RunManifest manifest;
  manifest.command = command;
  manifest.config = config;
  manifest.seeds = seeds;
  manifest.wall_clock_seconds = seconds;
  manifest.outputs.emplace_back(opt.out, csv);
  write_file(opt.out, csv);
  for (auto& o : extra) {
    write_file(o.path, o.content);
    manifest.outputs.emplace_back(o.path, std::move(o.content));
  }
  std::ostringstream text;
  write_key_values(text, manifest.to_key_values());
  write_file(opt.out + ".manifest", text.str());
}

template <class T>
void echo(KeyValues& kv, const std::string& key, const std::optional<T>& v) {
  if (!v) return;
  if constexpr (std::is_floating_point_v<T>) {
    kv[key] = format_double(*v);
  } else {
    kv[key] = std::to_string(*v);
  }
}

KeyValues experiment_echo(const Options& opt, const ExperimentConfig& cfg) {
  KeyValues kv;
  kv["dist"] = opt.dist;
  kv["n"] = opt.n;
  echo(kv, "rate", cfg.rate);
  echo(kv, "rows", cfg.rows);
  kv["delta"] = format_double(cfg.delta);
  if (const auto* g = std::get_if<GivenAlpha>(&cfg.side_info)) kv["alpha"] = format_double(g->alpha);
  if (std::holds_alternative<Seeded>(cfg.side_info)) kv["batch"] = opt.batch;
  echo(kv, "epsilon", cfg.epsilon);
  echo(kv, "detect-epsilon", cfg.detect_epsilon);
  echo(kv, "min-retained", cfg.min_retained);
  echo(kv, "min-detected", cfg.min_detected);
  kv["trials"] = std::to_string(cfg.trials);
  kv["seed"] = std::to_string(cfg.master_seed);
  kv["threads"] = std::to_string(cfg.threads);
  kv["row-model"] = row_model_name(cfg.row_model);
  kv["max-n"] = std::to_string(cfg.max_n);
  kv["max-cells"] = std::to_string(cfg.max_cells);
  kv["allow-large"] = cfg.allow_large ? "true" : "false";
  return kv;
}

ExperimentConfig experiment_config(const Options& opt) {
  ExperimentConfig cfg;
  cfg.dist = parse_distribution(opt.dist);
  cfg.n_values = parse_count_list(opt.n);
  cfg.rate = opt.rate;
  cfg.rows = opt.rows;
  cfg.delta = opt.delta;
  cfg.epsilon = opt.epsilon;
  cfg.detect_epsilon = opt.detect_epsilon;
  cfg.min_retained = opt.min_retained;
  cfg.min_detected = opt.min_detected;
  cfg.trials = opt.trials;
  cfg.master_seed = opt.seed;
  cfg.threads = opt.threads;
  cfg.row_model = parse_row_model(opt.row_model);
  cfg.max_n = opt.max_n;
  cfg.max_cells = opt.max_cells;
  cfg.allow_large = opt.allow_large;
  return cfg;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

int run_rates(const Options& opt) {
  const auto start = std::chrono::steady_clock::now();
  RatesConfig cfg;
  cfg.dist = parse_distribution(opt.dist);
  cfg.deltas = parse_real_list(opt.deltas);
  cfg.alphas = parse_real_list(opt.alphas);
  KeyValues kv{{"dist", opt.dist}, {"deltas", opt.deltas}, {"alphas", opt.alphas}};
  emit(opt, "rates", rates_csv(cfg), {}, kv, {}, seconds_since(start));
  return kExitOk;
}

std::vector<Output> trials_output(const Options& opt, const std::vector<MatchPoint>& points) {
  if (opt.trials_out.empty()) return {};
  return {{opt.trials_out, trials_csv(points)}};
}

int run_simulate_match(const Options& opt) {
  const auto start = std::chrono::steady_clock::now();
  ExperimentConfig cfg = experiment_config(opt);
  cfg.side_info = GivenAlpha{opt.alpha};
  const auto points = simulate_match(cfg);
  emit(opt, "simulate-match", match_csv(points, cfg.trials), trials_output(opt, points), experiment_echo(opt, cfg),
       trial_seed_entries(points), seconds_since(start));
  return kExitOk;
}

int run_pipeline_cmd(const Options& opt) {
  const auto start = std::chrono::steady_clock::now();
  ExperimentConfig cfg = experiment_config(opt);
  cfg.side_info = Seeded{parse_count_list(opt.batch.empty() ? "0" : opt.batch)};
  const auto points = run_pipeline(cfg);
  emit(opt, "pipeline", pipeline_csv(points), trials_output(opt, points), experiment_echo(opt, cfg),
       trial_seed_entries(points), seconds_since(start));
  return kExitOk;
}

int run_simulate_detect(const Options& opt) {
  const auto start = std::chrono::steady_clock::now();
  DetectConfig cfg;
  cfg.dist = parse_distribution(opt.dist);
  cfg.n_values = parse_count_list(opt.n);
  cfg.batch_sizes = parse_count_list(opt.batch.empty() ? "8,16,24" : opt.batch);
  cfg.delta = opt.delta;
  cfg.epsilon = opt.epsilon.value_or(0.05);
  cfg.trials = opt.trials;
  cfg.master_seed = opt.seed;
  cfg.threads = opt.threads;
  const auto points = simulate_detect(cfg);
  KeyValues kv{{"dist", opt.dist},
               {"n", opt.n},
               {"batch", opt.batch.empty() ? "8,16,24" : opt.batch},
               {"delta", format_double(cfg.delta)},
               {"epsilon", format_double(cfg.epsilon)},
               {"trials", std::to_string(cfg.trials)},
               {"seed", std::to_string(cfg.master_seed)},
               {"threads", std::to_string(cfg.threads)}};
  emit(opt, "simulate-detect", detect_csv(points), {}, kv, trial_seed_entries(points, cfg.trials),
       seconds_since(start));
  return kExitOk;
}

int run_oracle_check(const Options& opt) {
  const auto start = std::chrono::steady_clock::now();
  oracles::SuiteConfig cfg;
  cfg.seed = opt.seed;
  cfg.cases = opt.cases;
  cfg.max_n = opt.max_oracle_n;
  cfg.allow_large = opt.allow_large;
  if (opt.inject_fault == "skip-first-column") {
    cfg.fault = detector::detail::DpFault::kSkipFirstColumn;
  } else if (opt.inject_fault != "none") {
    throw ConfigError("--inject-fault must be none or skip-first-column");
  }
  const auto report = oracles::run_suite(cfg);

  std::ostringstream csv;
  csv << "check,instances,failures,status\n";
  for (const auto& c : report.checks) {
    csv << c.name << ',' << c.instances << ',' << c.failures << ',' << (c.failures == 0 ? "pass" : "FAIL") << '\n';
  }
  for (const auto& c : report.checks) {
    if (c.failures != 0) std::cerr << "check " << c.name << " failed; first counterexample:\n" << c.counterexample << '\n';
  }
  KeyValues kv{{"seed", std::to_string(cfg.seed)},
               {"cases", std::to_string(cfg.cases)},
               {"max-oracle-n", std::to_string(cfg.max_n)},
               {"inject-fault", opt.inject_fault}};
  emit(opt, "oracle-check", csv.str(), {}, kv, {{"suite", std::to_string(cfg.seed)}}, seconds_since(start));
  std::cerr << (report.passed() ? "oracle-check: all checks passed\n" : "oracle-check: FAILED\n");
  return report.passed() ? kExitOk : kExitCheckFailed;
}

void add_common(CLI::App* sub, Options& opt) {
  sub->add_option("--config", opt.config, "Flat key=value config file; keys are long option names");
  sub->add_option("--seed", opt.seed, "Master seed");
  sub->add_option("--out", opt.out, "Output CSV path (manifest goes to PATH.manifest); stdout if omitted");
  sub->add_option("--threads", opt.threads, "Worker threads")->check(CLI::PositiveNumber);
  sub->add_option("--simd", opt.simd, "Kernel backend: scalar or avx2")->check(CLI::IsMember({"scalar", "avx2"}));
}

void add_trials(CLI::App* sub, Options& opt) {
  sub->add_option("--trials", opt.trials, "Monte Carlo trials per grid point")->check(CLI::PositiveNumber);
}

void add_experiment(CLI::App* sub, Options& opt) {
  add_trials(sub, opt);
  sub->add_option("--dist", opt.dist, "bern:P, uniform:Q, or p0,p1,...");
  sub->add_option("--n", opt.n, "Column counts, list or start:step:stop");
  auto* rate = sub->add_option("--rate", opt.rate, "Growth rate R; m = round(2^(nR))");
  auto* rows = sub->add_option("--rows", opt.rows, "Explicit row count m");
  rate->excludes(rows);
  sub->add_option("--delta", opt.delta, "Deletion probability");
  sub->add_option("--epsilon", opt.epsilon, "Matcher typicality slack (default 0.1 H)");
  sub->add_option("--min-retained", opt.min_retained, "Matcher threshold on retained columns");
  sub->add_option("--min-detected", opt.min_detected, "Matcher threshold on detected deletions");
  sub->add_option("--row-model", opt.row_model, "auto, explicit or implicit")
      ->check(CLI::IsMember({"auto", "explicit", "implicit"}));
  sub->add_option("--max-n", opt.max_n, "Guard on n");
  sub->add_option("--max-cells", opt.max_cells, "Guard on m*n for explicit databases");
  sub->add_flag("--allow-large", opt.allow_large, "Lift the size guards");
  sub->add_option("--trials-out", opt.trials_out, "Per-trial CSV path");
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);

  CLI::App app{"Database matching under random column deletions"};
  app.set_version_flag("--version", std::string("dbmatch ") + kVersion);
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  Options opt;
  auto* rates = app.add_subcommand("rates", "Achievable rate table");
  add_common(rates, opt);
  rates->add_option("--dist", opt.dist, "bern:P, uniform:Q, or p0,p1,...");
  rates->add_option("--deltas", opt.deltas, "Deletion probabilities, list or start:step:stop");
  rates->add_option("--alphas", opt.alphas, "Detection probabilities");

  auto* match = app.add_subcommand("simulate-match", "Matching error with given detection probability");
  add_common(match, opt);
  add_experiment(match, opt);
  match->add_option("--alpha", opt.alpha, "Detection probability");

  auto* detect = app.add_subcommand("simulate-detect", "Empirical detection probability of the seed detector");
  add_common(detect, opt);
  add_trials(detect, opt);
  detect->add_option("--dist", opt.dist, "bern:P, uniform:Q, or p0,p1,...");
  detect->add_option("--n", opt.n, "Column counts");
  detect->add_option("--batch", opt.batch, "Seed batch sizes (default 8,16,24)");
  detect->add_option("--delta", opt.delta, "Deletion probability");
  detect->add_option("--epsilon", opt.epsilon, "Typicality slack (default 0.05)");

  auto* pipeline = app.add_subcommand("pipeline", "Seeds -> detected deletions -> matching");
  add_common(pipeline, opt);
  add_experiment(pipeline, opt);
  pipeline->add_option("--batch", opt.batch, "Seed batch sizes");
  pipeline->add_option("--detect-epsilon", opt.detect_epsilon, "Detector typicality slack (default: matcher's)");

  auto* oracle = app.add_subcommand("oracle-check", "Exhaustive small-instance verification");
  add_common(oracle, opt);
  oracle->add_option("--cases", opt.cases, "Random instances");
  oracle->add_option("--max-oracle-n", opt.max_oracle_n, "Largest n for enumeration");
  oracle->add_flag("--allow-large", opt.allow_large, "Lift the enumeration guard");
  oracle->add_option("--inject-fault", opt.inject_fault, "none or skip-first-column");

  try {
    if (auto path = find_config(args); path && !args.empty()) {
      auto extra = config_arguments(*path);
      args.insert(args.begin() + 1, extra.begin(), extra.end());
    }
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (!opt.simd.empty()) kernels::set_backend(opt.simd == "avx2" ? kernels::Backend::kAvx2 : kernels::Backend::kScalar);
    if (rates->parsed()) return run_rates(opt);
    if (match->parsed()) return run_simulate_match(opt);
    if (detect->parsed()) return run_simulate_detect(opt);
    if (pipeline->parsed()) return run_pipeline_cmd(opt);
    if (oracle->parsed()) return run_oracle_check(opt);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ArgumentError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const GuardError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitCheckFailed;
  }
  return kExitUsage;
}
