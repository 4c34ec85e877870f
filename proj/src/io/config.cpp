#include "xxzotoc/io/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace xxz::io {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<KeySpec> chain_keys(bool single_point) {
  std::vector<KeySpec> keys;
  if (single_point) {
    keys.push_back({"n", "", "number of sites", true});
    keys.push_back({"jz", "", "Jz/J", true});
    keys.push_back({"h", "0", "h/J", false});
  } else {
    keys.push_back({"n", "", "site counts: list or start:stop:step", true});
    keys.push_back({"jz", "", "Jz/J values: list or start:stop:step", true});
    keys.push_back({"h", "0", "h/J values: list or start:stop:step", false});
  }
  keys.push_back({"boundary", "default", "open, periodic, or default (periodic for even N, open for odd)"});
  keys.push_back({"max-sites", "14", "dense diagonalization cap"});
  keys.push_back({"tolerance", "relative:1e-9",
                  "degeneracy tolerance: relative:F, absolute:E, window:T (pi/(2T))"});
  return keys;
}

void append(std::vector<KeySpec>& keys, std::initializer_list<KeySpec> more) {
  keys.insert(keys.end(), more.begin(), more.end());
}

const KeySpec kOut{"out", "out", "output directory"};
const KeySpec kOp{"op", "sz", "Pauli operator for W and V: sx, sy, sz"};
const KeySpec kSite{"site", "bulk", "operator site, or bulk for floor(N/2)"};
const KeySpec kTermIv{"term-iv", "absent", "accidental resonances: absent or scan"};
const KeySpec kBudget{"budget", "20000000", "quadruple budget for term-iv scan"};
const KeySpec kVerbose{"verbose", "0", "1 prints progress to stderr"};

std::vector<CommandSchema> build_schemas() {
  std::vector<CommandSchema> s;

  auto spectrum = chain_keys(true);
  append(spectrum, {kOut, kVerbose});
  s.push_back({"spectrum", "eigenvalues with sector and degenerate-set labels", spectrum});

  auto saturation = chain_keys(true);
  append(saturation, {kOp, kSite,
                      {"initial", "ground", "ground, member:K (0-based ground-set member), or haar"},
                      {"seed", "0", "seed for haar initial states"},
                      kTermIv, kBudget, kOut, kVerbose});
  s.push_back({"saturation", "infinite-time OTOC value and its ground-set split", saturation});

  auto otoc = saturation;
  otoc.insert(otoc.end() - 2, {{"t-max", "20", "last sample time, units of 1/J"},
                               {"samples", "2000", "number of time samples"},
                               {"window", "20", "averaging window T"},
                               {"haar-samples", "0", "with initial=haar and > 1: infinite-temperature estimate"}});
  s.push_back({"otoc", "sampled F(t), its window average and the saturation report", otoc});

  auto sweep = chain_keys(false);
  append(sweep, {kOp, kSite, kTermIv, kBudget,
                 {"workers", "0", "worker threads, 0 for XXZOTOC_WORKERS or all cores"}, kOut, kVerbose});
  s.push_back({"phase-diagram", "saturation values over a (Jz, h, N) grid", sweep});

  s.push_back({"scaling",
               "critical points from phase-diagram CSVs and the fit Jz_c = a N^xi + Jz_inf",
               {{"input", "", "phase-diagram CSV files, comma separated", true},
                {"h", "0", "field of the cross-section"},
                {"series", "f_gs", "column to threshold: f_sat or f_gs"},
                {"threshold", "0.5", "crossing level"},
                {"direction", "any", "crossing direction: any, rising, falling"},
                kOut, kVerbose}});

  auto diag = chain_keys(false);
  append(diag, {kOp, kSite, kOut, kVerbose});
  s.push_back({"diagnostics", "operator-ansatz, participation and fluctuation table", diag});
  return s;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const std::string& what) {
  throw ConfigError(key + ": " + what + ", got '" + value + "'");
}

}  // namespace

const KeySpec* CommandSchema::find(std::string_view key) const {
  for (const auto& k : keys) {
    if (k.key == key) return &k;
  }
  return nullptr;
}

const std::vector<CommandSchema>& command_schemas() {
  static const std::vector<CommandSchema> schemas = build_schemas();
  return schemas;
}

const CommandSchema& schema_for(std::string_view command) {
  for (const auto& s : command_schemas()) {
    if (s.name == command) return s;
  }
  throw ConfigError("unknown subcommand '" + std::string(command) + "'");
}

ConfigMap parse_config(std::string_view text, const std::string& origin) {
  ConfigMap out;
  const std::string body = trim(text);
  if (!body.empty() && body.front() == '{') {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError(origin + ": invalid JSON: " + e.what());
    }
    const nlohmann::json& obj = doc.contains("config") ? doc["config"] : doc;
    if (!obj.is_object()) throw ConfigError(origin + ": expected a JSON object");
    for (const auto& [key, value] : obj.items()) {
      if (value.is_string()) out[key] = value.get<std::string>();
      else if (value.is_number() || value.is_boolean()) out[key] = value.dump();
      else throw ConfigError(origin + ": key '" + key + "' must be a string or number");
    }
    return out;
  }

  std::istringstream in{std::string(text)};
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    const std::string content = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (content.empty()) continue;
    const auto eq = content.find('=');
    const std::string where = origin + ":" + std::to_string(number);
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value', got '" + content + "'");
    const std::string key = trim(content.substr(0, eq));
    const std::string value = trim(content.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + ": missing key before '='");
    if (out.count(key)) throw ConfigError(where + ": duplicate key '" + key + "'");
    out[key] = value;
  }
  return out;
}

ConfigMap load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), path);
}

ConfigMap resolve_config(const CommandSchema& schema, const ConfigMap& file, const ConfigMap& flags) {
  ConfigMap out;
  for (const auto& k : schema.keys) {
    if (!k.default_value.empty()) out[k.key] = k.default_value;
  }
  for (const auto* source : {&file, &flags}) {
    for (const auto& [key, value] : *source) {
      if (schema.find(key) == nullptr) {
        throw ConfigError(key + ": unknown key for '" + schema.name + "'");
      }
      out[key] = value;
    }
  }
  for (const auto& k : schema.keys) {
    if (k.required && (!out.count(k.key) || out[k.key].empty())) {
      throw ConfigError(k.key + ": required for '" + schema.name + "'");
    }
  }
  return out;
}

double parse_real(std::string_view text) {
  const std::string s = trim(text);
  if (s.empty()) throw ConfigError("empty number");
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || errno == ERANGE) throw ConfigError("not a number: '" + s + "'");
  return v;
}

long long parse_integer(std::string_view text) {
  const std::string s = trim(text);
  if (s.empty()) throw ConfigError("empty integer");
  char* end = nullptr;
  errno = 0;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (end != s.c_str() + s.size() || errno == ERANGE) throw ConfigError("not an integer: '" + s + "'");
  return v;
}

std::vector<double> parse_range(std::string_view text) {
  const auto parts = split(text, ':');
  if (parts.size() != 3) throw ConfigError("range must be start:stop:step, got '" + std::string(text) + "'");
  const double start = parse_real(parts[0]);
  const double stop = parse_real(parts[1]);
  const double step = parse_real(parts[2]);
  if (!std::isfinite(start) || !std::isfinite(stop) || !std::isfinite(step)) {
    throw ConfigError("range bounds must be finite");
  }
  if (step == 0.0 || (stop - start) * step < 0.0) {
    throw ConfigError("range step must be nonzero and point from start to stop");
  }
  const double span = (stop - start) / step;
  if (span > 1e6) throw ConfigError("range has more than a million points");
  // Samples beyond stop by less than half a step are kept.
  const auto count = static_cast<long long>(std::ceil(span - 0.5)) + 1;
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(count));
  for (long long k = 0; k < count; ++k) out.push_back(start + static_cast<double>(k) * step);
  return out;
}

std::vector<double> parse_real_list(std::string_view text) {
  const std::string s = trim(text);
  if (s.find(':') != std::string::npos) return parse_range(s);
  std::vector<double> out;
  for (const auto& item : split(s, ',')) out.push_back(parse_real(item));
  return out;
}

bool Settings::has(const std::string& key) const { return values_.count(key) != 0; }

const std::string& Settings::text(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError(key + ": not set");
  return it->second;
}

double Settings::real(const std::string& key) const {
  const auto& v = text(key);
  try {
    return parse_real(v);
  } catch (const ConfigError&) {
    bad_value(key, v, "expected a number");
  }
}

long long Settings::integer(const std::string& key) const {
  const auto& v = text(key);
  try {
    return parse_integer(v);
  } catch (const ConfigError&) {
    bad_value(key, v, "expected an integer");
  }
}

unsigned long long Settings::count(const std::string& key) const {
  const long long v = integer(key);
  if (v < 0) bad_value(key, text(key), "expected a non-negative integer");
  return static_cast<unsigned long long>(v);
}

std::vector<double> Settings::reals(const std::string& key) const {
  const auto& v = text(key);
  try {
    return parse_real_list(v);
  } catch (const ConfigError& e) {
    bad_value(key, v, e.what());
  }
}

std::vector<int> Settings::integers(const std::string& key) const {
  std::vector<int> out;
  for (double x : reals(key)) {
    if (x != std::round(x) || std::abs(x) > 1e9) bad_value(key, text(key), "expected integers");
    out.push_back(static_cast<int>(std::lround(x)));
  }
  return out;
}

std::vector<std::string> Settings::strings(const std::string& key) const {
  std::vector<std::string> out;
  for (auto& item : split(text(key), ',')) {
    if (!item.empty()) out.push_back(std::move(item));
  }
  return out;
}

const std::string& Settings::choice(const std::string& key, const std::vector<std::string>& choices) const {
  const auto& v = text(key);
  if (std::find(choices.begin(), choices.end(), v) == choices.end()) {
    std::string list;
    for (const auto& c : choices) list += (list.empty() ? "" : ", ") + c;
    bad_value(key, v, "expected one of " + list);
  }
  return v;
}

}  // namespace xxz::io
