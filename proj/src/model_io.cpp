#include "dbmatch/model_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <system_error>

#include "dbmatch/errors.hpp"

namespace dbmatch {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::uint64_t parse_u64(const std::string& text, const char* what) {
  std::uint64_t v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw ArgumentError(std::string("cannot parse ") + what + " from '" + text + "'");
  }
  return v;
}

std::string flags_to_string(const std::vector<std::uint8_t>& flags) {
  std::string s;
  s.reserve(flags.size());
  for (auto f : flags) s.push_back(f ? '1' : '0');
  return s;
}

std::vector<std::uint8_t> flags_from_string(const std::string& s) {
  std::vector<std::uint8_t> out;
  out.reserve(s.size());
  for (char c : s) {
    if (c != '0' && c != '1') throw ArgumentError("flag vectors must contain only 0 and 1");
    out.push_back(c == '1' ? 1 : 0);
  }
  return out;
}

const std::string& require(const KeyValues& kv, const std::string& key) {
  const auto it = kv.find(key);
  if (it == kv.end()) throw ArgumentError("manifest is missing key '" + key + "'");
  return it->second;
}

std::filesystem::path with_suffix(const std::filesystem::path& prefix, const char* suffix) {
  return std::filesystem::path(prefix.string() + suffix);
}

}  // namespace

void write_database_csv(std::ostream& out, const Database& db) {
  out << db.rows() << ',' << db.cols() << ',' << db.alphabet_size() << '\n';
  for (std::size_t i = 0; i < db.rows(); ++i) {
    const auto row = db.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out << ',';
      out << static_cast<unsigned>(row[j]);
    }
    out << '\n';
  }
}

Database read_database_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ArgumentError("database CSV is empty");
  const auto header = split(line, ',');
  if (header.size() != 3) throw ArgumentError("database CSV header must be 'm,n,q'");
  const std::size_t m = parse_u64(header[0], "m");
  const std::size_t n = parse_u64(header[1], "n");
  const std::size_t q = parse_u64(header[2], "q");
  std::vector<Symbol> data;
  data.reserve(m * n);
  for (std::size_t i = 0; i < m; ++i) {
    if (!std::getline(in, line)) throw ArgumentError("database CSV ends after " + std::to_string(i) + " rows");
    if (n == 0) {
      if (!line.empty() && line != "\r") throw ArgumentError("zero-column database row is not empty");
      continue;
    }
    const auto fields = split(line, ',');
    if (fields.size() != n) {
      throw ArgumentError("database CSV row " + std::to_string(i) + " has " + std::to_string(fields.size()) +
                          " fields, expected " + std::to_string(n));
    }
    for (const auto& f : fields) {
      const auto v = parse_u64(f, "symbol");
      if (v >= q) throw ArgumentError("symbol " + f + " is out of range for q=" + std::to_string(q));
      data.push_back(static_cast<Symbol>(v));
    }
  }
  return Database(m, n, q, std::move(data));
}

void write_key_values(std::ostream& out, const KeyValues& kv) {
  for (const auto& [k, v] : kv) out << k << '=' << v << '\n';
}

KeyValues read_key_values(std::istream& in) {
  KeyValues kv;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ArgumentError("key-value line without '=': " + line);
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

double parse_double(const std::string& text) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw ArgumentError("cannot parse a number from '" + text + "'");
  }
  return v;
}

void save_experiment(const std::filesystem::path& prefix, const DeletionExperiment& exp) {
  {
    std::ofstream out(with_suffix(prefix, ".c1.csv"), std::ios::binary);
    write_database_csv(out, exp.c1);
  }
  {
    std::ofstream out(with_suffix(prefix, ".c2.csv"), std::ios::binary);
    write_database_csv(out, exp.c2);
  }
  KeyValues kv;
  kv["format"] = "dbmatch-experiment-1";
  kv["master_seed"] = std::to_string(exp.master_seed);
  kv["delta"] = format_double(exp.deletion.delta);
  kv["alpha"] = format_double(exp.detection.alpha);
  kv["m"] = std::to_string(exp.c1.rows());
  kv["n"] = std::to_string(exp.c1.cols());
  kv["q"] = std::to_string(exp.c1.alphabet_size());
  kv["retained"] = std::to_string(exp.c2.cols());
  std::string perm;
  for (std::size_t i = 0; i < exp.labeling.size(); ++i) {
    if (i) perm.push_back(' ');
    perm += std::to_string(exp.labeling.forward(i));
  }
  kv["permutation"] = perm;
  kv["deletion_flags"] = flags_to_string(exp.deletion.flags);
  kv["detection_flags"] = flags_to_string(exp.detection.flags);
  std::ofstream out(with_suffix(prefix, ".manifest"), std::ios::binary);
  write_key_values(out, kv);
}

DeletionExperiment load_experiment(const std::filesystem::path& prefix) {
  std::ifstream manifest(with_suffix(prefix, ".manifest"), std::ios::binary);
  if (!manifest) throw ArgumentError("cannot open " + with_suffix(prefix, ".manifest").string());
  const KeyValues kv = read_key_values(manifest);
  if (require(kv, "format") != "dbmatch-experiment-1") throw ArgumentError("unknown experiment format");

  DeletionExperiment exp;
  {
    std::ifstream in(with_suffix(prefix, ".c1.csv"), std::ios::binary);
    if (!in) throw ArgumentError("cannot open " + with_suffix(prefix, ".c1.csv").string());
    exp.c1 = read_database_csv(in);
  }
  {
    std::ifstream in(with_suffix(prefix, ".c2.csv"), std::ios::binary);
    if (!in) throw ArgumentError("cannot open " + with_suffix(prefix, ".c2.csv").string());
    exp.c2 = read_database_csv(in);
  }
  exp.master_seed = parse_u64(require(kv, "master_seed"), "master_seed");
  exp.deletion.delta = parse_double(require(kv, "delta"));
  exp.detection.alpha = parse_double(require(kv, "alpha"));
  exp.deletion.flags = flags_from_string(require(kv, "deletion_flags"));
  exp.detection.flags = flags_from_string(require(kv, "detection_flags"));
  std::vector<std::size_t> perm;
  std::istringstream ps(require(kv, "permutation"));
  for (std::string tok; ps >> tok;) perm.push_back(parse_u64(tok, "permutation entry"));
  exp.labeling = Labeling(std::move(perm));

  if (parse_u64(require(kv, "m"), "m") != exp.c1.rows() || parse_u64(require(kv, "n"), "n") != exp.c1.cols() ||
      parse_u64(require(kv, "retained"), "retained") != exp.c2.cols()) {
    throw ArgumentError("manifest dimensions disagree with the database files");
  }
  if (const auto problem = validate_experiment(exp); !problem.empty()) {
    throw ArgumentError("reloaded experiment is inconsistent: " + problem);
  }
  return exp;
}

}  // namespace dbmatch
