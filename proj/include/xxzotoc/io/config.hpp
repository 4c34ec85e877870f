#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace xxz::io {

/// Bad configuration: parse errors carry a line number, validation errors name the key.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Flat key -> text map; every value keeps its textual form until resolved.
using ConfigMap = std::map<std::string, std::string>;

struct KeySpec {
  std::string key;
  std::string default_value;  // empty: no default
  std::string help;
  bool required = false;
};

/// Keys accepted by one subcommand, in display order.
struct CommandSchema {
  std::string name;
  std::string summary;
  std::vector<KeySpec> keys;

  const KeySpec* find(std::string_view key) const;
};

/// spectrum, otoc, saturation, phase-diagram, scaling, diagnostics.
const std::vector<CommandSchema>& command_schemas();
const CommandSchema& schema_for(std::string_view command);

/// Either `key = value` lines (# comments, blank lines ignored) or a JSON
/// object. A JSON object with a "config" member (a run manifest) is read
/// through that member. Errors name the origin and line.
ConfigMap parse_config(std::string_view text, const std::string& origin = "<config>");
ConfigMap load_config(const std::string& path);

/// Defaults, then file values, then flags; unknown keys and missing required
/// keys raise ConfigError naming the key.
ConfigMap resolve_config(const CommandSchema& schema, const ConfigMap& file, const ConfigMap& flags);

/// Typed access to a resolved map; conversion failures name the key.
class Settings {
 public:
  explicit Settings(ConfigMap values) : values_(std::move(values)) {}

  const ConfigMap& values() const noexcept { return values_; }
  bool has(const std::string& key) const;
  const std::string& text(const std::string& key) const;
  double real(const std::string& key) const;
  long long integer(const std::string& key) const;
  unsigned long long count(const std::string& key) const;
  /// Real list: a range `start:stop:step`, a comma list, or one value.
  std::vector<double> reals(const std::string& key) const;
  /// Integer list with the same syntax.
  std::vector<int> integers(const std::string& key) const;
  std::vector<std::string> strings(const std::string& key) const;
  /// One of `choices`, else ConfigError listing them.
  const std::string& choice(const std::string& key, const std::vector<std::string>& choices) const;

 private:
  ConfigMap values_;
};

/// Inclusive `start:stop:step` grid of points start + k * step; a point past
/// stop by less than half a step still counts, so rounding never drops stop.
std::vector<double> parse_range(std::string_view text);
/// Range, comma list, or single number.
std::vector<double> parse_real_list(std::string_view text);
double parse_real(std::string_view text);
long long parse_integer(std::string_view text);

}  // namespace xxz::io
