#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gaussifs/ifs.hpp"

namespace gaussifs {

inline constexpr const char* kVersion = "1.0.0";

/// One run's full configuration. Everything that influences numbers lives
/// here so that a fixed config reproduces output byte for byte.
struct RunConfig {
  SystemKind kind = SystemKind::LinearGauss;
  std::vector<long> ns;  // kInfiniteTruncation entries allowed (operator cmd)
  std::string n_spec = "";
  bool geometric = false;
  int grid_M = 48;
  int depth = 10;
  std::vector<double> eps = {0.3, 0.5};
  std::vector<double> ts = {1.0};
  std::string families = "abc";
  std::string format = "csv";
  std::string out;
  std::uint64_t seed = 1;
  int jobs = 1;
  bool explain = false;
  bool inject_wrong_h = false;
  std::string suite;  // verify: run only the named suite ("" = all)
  std::map<std::string, double> tol;  // named tolerance overrides

  double tolerance(const std::string& name, double fallback) const {
    auto it = tol.find(name);
    return it == tol.end() ? fallback : it->second;
  }
};

/// Parse "k1=v1" lines (comments with '#', blank lines ignored) into config
/// fields; unknown keys are an error. Flags given on the command line
/// override file values.
void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value);
RunConfig parse_config_file(const std::string& path);

/// Expand an --n specification: "8", "2,4,8", "2..64" (every integer, or
/// doubling steps when geometric is set), and the token "inf".
std::vector<long> parse_n_spec(const std::string& spec, bool geometric);

std::vector<double> parse_double_list(const std::string& spec);

struct ResultTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<std::pair<std::string, std::string>> metadata;  // ordered echo
  std::vector<std::string> notes;  // --explain commentary
};

/// Shortest-exact decimal for a double ("%.17g" trimmed); locale-free.
std::string format_double(double v);

/// CSV: '#' metadata lines, then a header row, then data rows; '.' decimal
/// separator, LF endings.
std::string to_csv(const ResultTable& t);

/// Same table as JSON (ordered keys, stable number formatting).
std::string to_json(const ResultTable& t);

/// Reconstruct the configuration from a table's metadata echo (the
/// round-trip counterpart of the emit path).
RunConfig config_from_metadata(const ResultTable& t);

void echo_config(ResultTable& t, const RunConfig& cfg);

/// Write to cfg.out, or stdout when no path is set.
void emit(const ResultTable& t, const RunConfig& cfg);

}  // namespace gaussifs
