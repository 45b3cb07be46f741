#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>

#include "dbmatch/model.hpp"

namespace dbmatch {

/// Database CSV: first line "m,n,q" (the three values), then one line per
/// row with comma-separated symbol indices. Rows of a zero-column database
/// are empty lines.
void write_database_csv(std::ostream& out, const Database& db);
/// Throws ArgumentError on malformed input.
Database read_database_csv(std::istream& in);

/// Flat "key=value" text, one pair per line; '#' starts a comment line.
using KeyValues = std::map<std::string, std::string>;
void write_key_values(std::ostream& out, const KeyValues& kv);
KeyValues read_key_values(std::istream& in);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);
double parse_double(const std::string& text);

/// Writes <prefix>.c1.csv, <prefix>.c2.csv and <prefix>.manifest.
void save_experiment(const std::filesystem::path& prefix, const DeletionExperiment& exp);
/// Reloads an experiment bit-exactly and re-validates every invariant.
DeletionExperiment load_experiment(const std::filesystem::path& prefix);

}  // namespace dbmatch
