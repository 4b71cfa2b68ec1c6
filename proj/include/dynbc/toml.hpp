#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace dynbc {

/// Error in a config file; `field` names the offending key or block.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& field, const std::string& message)
      : std::runtime_error("config field '" + field + "': " + message), field(field) {}
  std::string field;
};

struct TomlValue {
  enum class Kind { string, number, boolean, array };
  Kind kind = Kind::number;
  std::string str;
  double number = 0.0;
  bool is_integer = false;
  bool boolean = false;
  std::vector<TomlValue> array;
};

/// Parser for the TOML subset used by experiment configs: [table.header]
/// sections, `key = value` pairs, strings, numbers, booleans, (possibly
/// multi-line) arrays, and # comments. Keys are exposed flattened as
/// dotted paths.
class TomlDocument {
 public:
  static TomlDocument parse(const std::string& text);
  static TomlDocument parse_file(const std::string& path);

  bool contains(const std::string& key) const { return values_.count(key) > 0; }
  bool has_block(const std::string& prefix) const;

  std::string get_string(const std::string& key) const;
  double get_number(const std::string& key) const;
  std::int64_t get_integer(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::vector<double> get_number_array(const std::string& key) const;
  std::vector<std::string> get_string_array(const std::string& key) const;
  const TomlValue& get_array(const std::string& key) const;

  std::string get_string_or(const std::string& key, const std::string& fallback) const;
  double get_number_or(const std::string& key, double fallback) const;
  std::int64_t get_integer_or(const std::string& key, std::int64_t fallback) const;
  bool get_bool_or(const std::string& key, bool fallback) const;

  const std::map<std::string, TomlValue>& values() const { return values_; }
  const std::string& text() const { return text_; }

 private:
  const TomlValue& require(const std::string& key) const;
  std::map<std::string, TomlValue> values_;
  std::string text_;
};

}  // namespace dynbc
