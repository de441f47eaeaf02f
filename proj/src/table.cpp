#include "gaussifs/table.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace gaussifs {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw std::invalid_argument("config key '" + key + "': expected true/false, got '" + v + "'");
}

long parse_long(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    const long x = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return x;
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key + "': expected an integer, got '" + v + "'");
  }
}

double parse_real(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size() || !std::isfinite(x)) throw std::invalid_argument("bad real");
    return x;
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key + "': expected a real number, got '" + v + "'");
  }
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string token;
  std::istringstream in(s);
  while (std::getline(in, token, sep)) out.push_back(token);
  return out;
}

std::string join_doubles(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += format_double(v[i]);
  }
  return out;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::vector<long> parse_n_spec(const std::string& spec, bool geometric) {
  if (trim(spec).empty()) throw std::invalid_argument("--n: empty specification");
  std::vector<long> ns;
  for (const std::string& raw : split(spec, ',')) {
    const std::string token = trim(raw);
    if (token.empty()) throw std::invalid_argument("--n: empty list entry in '" + spec + "'");
    if (token == "inf") {
      ns.push_back(kUnboundedAlphabet);
      continue;
    }
    const auto dots = token.find("..");
    if (dots == std::string::npos) {
      const long n = parse_long(token, "n");
      if (n < 1) throw std::invalid_argument("--n: truncation level must be >= 1");
      ns.push_back(n);
      continue;
    }
    const long a = parse_long(token.substr(0, dots), "n");
    const long b = parse_long(token.substr(dots + 2), "n");
    if (a < 1 || b < a) throw std::invalid_argument("--n: bad range '" + token + "'");
    if (geometric) {
      for (long n = a; n <= b; n *= 2) ns.push_back(n);
    } else {
      if (b - a > 2'000'000)
        throw std::invalid_argument("--n: range '" + token + "' enumerates too many levels");
      for (long n = a; n <= b; ++n) ns.push_back(n);
    }
  }
  return ns;
}

std::vector<double> parse_double_list(const std::string& spec) {
  std::vector<double> out;
  for (const std::string& raw : split(spec, ',')) {
    const std::string token = trim(raw);
    if (token.empty()) throw std::invalid_argument("empty entry in list '" + spec + "'");
    out.push_back(parse_real(token, "list"));
  }
  if (out.empty()) throw std::invalid_argument("empty list");
  return out;
}

void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "version") return;  // emitted for provenance, accepted back silently
  if (key == "kind") {
    if (value == "linear") cfg.kind = SystemKind::LinearGauss;
    else if (value == "gauss") cfg.kind = SystemKind::Gauss;
    else throw std::invalid_argument("config key 'kind': expected linear|gauss, got '" + value + "'");
  } else if (key == "n") {
    cfg.n_spec = value;  // expanded by the command once 'geometric' is known
  } else if (key == "geometric") {
    cfg.geometric = parse_bool(value, key);
  } else if (key == "grid") {
    cfg.grid_M = static_cast<int>(parse_long(value, key));
    if (cfg.grid_M < 8) throw std::invalid_argument("config key 'grid': need M >= 8");
  } else if (key == "depth") {
    cfg.depth = static_cast<int>(parse_long(value, key));
    if (cfg.depth < 1) throw std::invalid_argument("config key 'depth': need depth >= 1");
  } else if (key == "eps") {
    cfg.eps = parse_double_list(value);
  } else if (key == "t") {
    cfg.ts = parse_double_list(value);
  } else if (key == "families") {
    cfg.families = value;
  } else if (key == "format") {
    if (value != "csv" && value != "json")
      throw std::invalid_argument("config key 'format': expected csv|json, got '" + value + "'");
    cfg.format = value;
  } else if (key == "out") {
    cfg.out = value;
  } else if (key == "seed") {
    try {
      std::size_t pos = 0;
      cfg.seed = std::stoull(value, &pos);
      if (pos != value.size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw std::invalid_argument("config key 'seed': expected an unsigned integer, got '" +
                                  value + "'");
    }
  } else if (key == "jobs") {
    cfg.jobs = static_cast<int>(parse_long(value, key));
    if (cfg.jobs < 1) throw std::invalid_argument("config key 'jobs': need >= 1");
  } else if (key == "explain") {
    cfg.explain = parse_bool(value, key);
  } else if (key == "suite") {
    cfg.suite = value;
  } else if (key == "inject_wrong_h") {
    cfg.inject_wrong_h = parse_bool(value, key);
  } else if (key.rfind("tol.", 0) == 0) {
    const std::string name = key.substr(4);
    if (name.empty()) throw std::invalid_argument("config: empty tolerance name");
    const double tol = parse_real(value, key);
    if (!(tol > 0)) throw std::invalid_argument("config key '" + key + "': tolerance must be positive");
    cfg.tol[name] = tol;
  } else {
    throw std::invalid_argument("unknown config key: " + key);
  }
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  RunConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": expected key=value");
    apply_config_entry(cfg, trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
  }
  return cfg;
}

void echo_config(ResultTable& t, const RunConfig& cfg) {
  auto put = [&t](const std::string& k, const std::string& v) { t.metadata.emplace_back(k, v); };
  put("version", kVersion);
  put("kind", cfg.kind == SystemKind::LinearGauss ? "linear" : "gauss");
  if (!cfg.n_spec.empty()) put("n", cfg.n_spec);
  put("geometric", cfg.geometric ? "true" : "false");
  put("grid", std::to_string(cfg.grid_M));
  put("depth", std::to_string(cfg.depth));
  put("eps", join_doubles(cfg.eps));
  put("t", join_doubles(cfg.ts));
  put("families", cfg.families);
  put("format", cfg.format);
  put("seed", std::to_string(cfg.seed));
  put("jobs", std::to_string(cfg.jobs));
  put("explain", cfg.explain ? "true" : "false");
  for (const auto& [name, tol] : cfg.tol) put("tol." + name, format_double(tol));
}

RunConfig config_from_metadata(const ResultTable& t) {
  RunConfig cfg;
  for (const auto& [key, value] : t.metadata) apply_config_entry(cfg, key, value);
  if (!cfg.n_spec.empty()) cfg.ns = parse_n_spec(cfg.n_spec, cfg.geometric);
  return cfg;
}

std::string to_csv(const ResultTable& t) {
  std::string out;
  for (const auto& [k, v] : t.metadata) out += "# " + k + "=" + v + "\n";
  for (const auto& note : t.notes) out += "# note: " + note + "\n";
  for (std::size_t i = 0; i < t.columns.size(); ++i) {
    if (i) out += ',';
    out += t.columns[i];
  }
  out += '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += format_double(row[i]);
    }
    out += '\n';
  }
  return out;
}

std::string to_json(const ResultTable& t) {
  nlohmann::ordered_json root;
  nlohmann::ordered_json meta = nlohmann::ordered_json::object();
  for (const auto& [k, v] : t.metadata) meta[k] = v;
  root["metadata"] = std::move(meta);
  root["columns"] = t.columns;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& row : t.rows) {
    nlohmann::ordered_json r = nlohmann::ordered_json::array();
    // JSON has no non-finite numbers; those cells degrade to strings.
    for (double v : row) {
      if (std::isfinite(v)) r.push_back(v);
      else r.push_back(format_double(v));
    }
    rows.push_back(std::move(r));
  }
  root["rows"] = std::move(rows);
  root["notes"] = t.notes;
  return root.dump(2) + "\n";
}

void emit(const ResultTable& t, const RunConfig& cfg) {
  const std::string payload = cfg.format == "json" ? to_json(t) : to_csv(t);
  if (cfg.out.empty()) {
    std::fwrite(payload.data(), 1, payload.size(), stdout);
    std::fflush(stdout);
    return;
  }
  std::ofstream f(cfg.out, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open output file: " + cfg.out);
  f.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (!f) throw std::runtime_error("failed writing output file: " + cfg.out);
}

}  // namespace gaussifs
