#include <cmath>
#include <sstream>
#include <string>

#include "dbmatch/errors.hpp"
#include "dbmatch/harness.hpp"

namespace dbmatch::harness {

namespace {

std::vector<std::string> split_list(std::string_view spec) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : spec) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_number(const std::string& text) {
  try {
    return parse_double(text);
  } catch (const ArgumentError&) {
    throw ConfigError("cannot parse a number from '" + text + "'");
  }
}

}  // namespace

Distribution parse_distribution(std::string_view spec) {
  const std::string text(spec);
  if (text.rfind("bern:", 0) == 0) return Distribution::bernoulli(parse_number(text.substr(5)));
  if (text.rfind("uniform:", 0) == 0) {
    const double q = parse_number(text.substr(8));
    if (q != std::floor(q) || q < 2) throw ConfigError("uniform alphabet size must be an integer >= 2");
    return Distribution::uniform(static_cast<std::size_t>(q));
  }
  std::vector<double> probabilities;
  for (const auto& item : split_list(text)) probabilities.push_back(parse_number(item));
  return Distribution(std::move(probabilities));
}

std::vector<double> parse_real_list(std::string_view spec) {
  const std::string text(spec);
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
    if (parts.size() != 3) throw ConfigError("range must be start:step:stop, got '" + text + "'");
    const double start = parse_number(parts[0]);
    const double step = parse_number(parts[1]);
    const double stop = parse_number(parts[2]);
    if (!(step > 0.0) || stop < start) throw ConfigError("range needs step > 0 and stop >= start");
    const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i) out[i] = start + static_cast<double>(i) * step;
    return out;
  }
  std::vector<double> out;
  for (const auto& item : split_list(text)) out.push_back(parse_number(item));
  return out;
}

std::vector<std::size_t> parse_count_list(std::string_view spec) {
  std::vector<std::size_t> out;
  for (double v : parse_real_list(spec)) {
    if (v < 0 || v != std::floor(v)) throw ConfigError("expected nonnegative integers in '" + std::string(spec) + "'");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

const char* row_model_name(RowModel m) noexcept {
  switch (m) {
    case RowModel::kAuto:
      return "auto";
    case RowModel::kExplicit:
      return "explicit";
    case RowModel::kImplicit:
      return "implicit";
  }
  return "unknown";
}

RowModel parse_row_model(std::string_view text) {
  if (text == "auto") return RowModel::kAuto;
  if (text == "explicit") return RowModel::kExplicit;
  if (text == "implicit") return RowModel::kImplicit;
  throw ConfigError("row model must be auto, explicit or implicit");
}

double row_count(const ExperimentConfig& cfg, std::size_t n) {
  if (cfg.rate.has_value() == cfg.rows.has_value()) {
    throw ConfigError("give exactly one of the growth rate R and the row count m");
  }
  if (cfg.rows) {
    if (*cfg.rows == 0) throw ConfigError("row count m must be at least 1");
    return static_cast<double>(*cfg.rows);
  }
  if (!(*cfg.rate >= 0.0)) throw ConfigError("growth rate R must be nonnegative");
  return std::max(1.0, std::round(std::exp2(static_cast<double>(n) * *cfg.rate)));
}

RowModel resolve_row_model(const ExperimentConfig& cfg, std::size_t n) {
  if (n == 0) throw ConfigError("column count n must be at least 1");
  if (n > cfg.max_n && !cfg.allow_large) {
    throw GuardError("n=" + std::to_string(n) + " exceeds the matching guard n <= " + std::to_string(cfg.max_n) +
                     "; pass --allow-large to override");
  }
  const double m = row_count(cfg, n);
  const double cells = m * static_cast<double>(n);
  const bool fits = cells <= static_cast<double>(cfg.max_cells);
  switch (cfg.row_model) {
    case RowModel::kAuto:
      return fits ? RowModel::kExplicit : RowModel::kImplicit;
    case RowModel::kExplicit:
      if (!fits && !cfg.allow_large) {
        std::ostringstream msg;
        msg.precision(4);
        msg << "explicit databases need m*n = " << cells << " cells (m = " << m << ", n = " << n
            << "), above the guard of " << cfg.max_cells
            << "; lower R or n, use --row-model implicit, or pass --allow-large";
        throw GuardError(msg.str());
      }
      return RowModel::kExplicit;
    case RowModel::kImplicit:
      return RowModel::kImplicit;
  }
  return RowModel::kExplicit;
}

}  // namespace dbmatch::harness
