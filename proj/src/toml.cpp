#include "dynbc/toml.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace dynbc {

namespace {

struct Cursor {
  const std::string& text;
  size_t pos = 0;
  int line = 1;

  bool done() const { return pos >= text.size(); }
  char peek() const { return text[pos]; }
  char take() {
    const char c = text[pos++];
    if (c == '\n') ++line;
    return c;
  }
  void skip_ws_inline() {
    while (!done() && (peek() == ' ' || peek() == '\t')) take();
  }
  void skip_to_eol() {
    while (!done() && peek() != '\n') take();
  }
  [[noreturn]] void fail(const std::string& field, const std::string& msg) const {
    throw ConfigError(field, msg + " (line " + std::to_string(line) + ")");
  }
};

bool bare_key_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

std::string parse_key(Cursor& cur) {
  std::string key;
  while (!cur.done() && (bare_key_char(cur.peek()) || cur.peek() == '.')) key.push_back(cur.take());
  if (key.empty()) cur.fail("<key>", "expected a key");
  return key;
}

TomlValue parse_value(Cursor& cur, const std::string& key);

TomlValue parse_array(Cursor& cur, const std::string& key) {
  TomlValue v;
  v.kind = TomlValue::Kind::array;
  cur.take();  // '['
  while (true) {
    // arrays may span lines
    while (!cur.done()) {
      cur.skip_ws_inline();
      if (cur.done()) break;
      const char c = cur.peek();
      if (c == '\n' || c == '\r') {
        cur.take();
        continue;
      }
      if (c == '#') {
        cur.skip_to_eol();
        continue;
      }
      break;
    }
    if (cur.done()) cur.fail(key, "unterminated array");
    if (cur.peek() == ']') {
      cur.take();
      break;
    }
    if (cur.peek() == ',') {
      cur.take();
      continue;
    }
    v.array.push_back(parse_value(cur, key));
  }
  return v;
}

TomlValue parse_value(Cursor& cur, const std::string& key) {
  cur.skip_ws_inline();
  if (cur.done()) cur.fail(key, "missing value");
  const char c = cur.peek();
  TomlValue v;
  if (c == '"') {
    cur.take();
    v.kind = TomlValue::Kind::string;
    while (!cur.done() && cur.peek() != '"') {
      char ch = cur.take();
      if (ch == '\\' && !cur.done()) {
        const char esc = cur.take();
        switch (esc) {
          case 'n': ch = '\n'; break;
          case 't': ch = '\t'; break;
          case '"': ch = '"'; break;
          case '\\': ch = '\\'; break;
          default: cur.fail(key, "unsupported escape sequence");
        }
      }
      v.str.push_back(ch);
    }
    if (cur.done()) cur.fail(key, "unterminated string");
    cur.take();
    return v;
  }
  if (c == '[') return parse_array(cur, key);
  // bare token: number or boolean
  std::string token;
  while (!cur.done() && cur.peek() != '\n' && cur.peek() != '#' && cur.peek() != ',' &&
         cur.peek() != ']' && cur.peek() != ' ' && cur.peek() != '\t' && cur.peek() != '\r')
    token.push_back(cur.take());
  if (token == "true" || token == "false") {
    v.kind = TomlValue::Kind::boolean;
    v.boolean = (token == "true");
    return v;
  }
  try {
    size_t consumed = 0;
    v.number = std::stod(token, &consumed);
    if (consumed != token.size()) throw std::invalid_argument("trailing characters");
  } catch (const std::exception&) {
    cur.fail(key, "cannot parse value '" + token + "'");
  }
  v.kind = TomlValue::Kind::number;
  v.is_integer = token.find_first_of(".eE") == std::string::npos;
  return v;
}

}  // namespace

TomlDocument TomlDocument::parse(const std::string& text) {
  TomlDocument doc;
  doc.text_ = text;
  Cursor cur{text};
  std::string section;
  while (!cur.done()) {
    cur.skip_ws_inline();
    if (cur.done()) break;
    const char c = cur.peek();
    if (c == '\n' || c == '\r') {
      cur.take();
      continue;
    }
    if (c == '#') {
      cur.skip_to_eol();
      continue;
    }
    if (c == '[') {
      cur.take();
      section = parse_key(cur);
      cur.skip_ws_inline();
      if (cur.done() || cur.peek() != ']') cur.fail(section, "unterminated table header");
      cur.take();
      continue;
    }
    const std::string key = parse_key(cur);
    cur.skip_ws_inline();
    if (cur.done() || cur.peek() != '=') cur.fail(key, "expected '=' after key");
    cur.take();
    const std::string full = section.empty() ? key : section + "." + key;
    if (doc.values_.count(full)) cur.fail(full, "duplicate key");
    doc.values_[full] = parse_value(cur, full);
    cur.skip_ws_inline();
    if (!cur.done() && cur.peek() == '#') cur.skip_to_eol();
    if (!cur.done() && cur.peek() != '\n') {
      if (cur.peek() == '\r') {
        cur.take();
        continue;
      }
      cur.fail(full, "unexpected trailing characters");
    }
  }
  return doc;
}

TomlDocument TomlDocument::parse_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError(path, "cannot open config file");
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse(buf.str());
}

bool TomlDocument::has_block(const std::string& prefix) const {
  const std::string p = prefix + ".";
  auto it = values_.lower_bound(p);
  return it != values_.end() && it->first.compare(0, p.size(), p) == 0;
}

const TomlValue& TomlDocument::require(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError(key, "missing required key");
  return it->second;
}

std::string TomlDocument::get_string(const std::string& key) const {
  const TomlValue& v = require(key);
  if (v.kind != TomlValue::Kind::string) throw ConfigError(key, "expected a string");
  return v.str;
}

double TomlDocument::get_number(const std::string& key) const {
  const TomlValue& v = require(key);
  if (v.kind != TomlValue::Kind::number) throw ConfigError(key, "expected a number");
  return v.number;
}

std::int64_t TomlDocument::get_integer(const std::string& key) const {
  const TomlValue& v = require(key);
  if (v.kind != TomlValue::Kind::number || !v.is_integer)
    throw ConfigError(key, "expected an integer");
  return static_cast<std::int64_t>(std::llround(v.number));
}

bool TomlDocument::get_bool(const std::string& key) const {
  const TomlValue& v = require(key);
  if (v.kind != TomlValue::Kind::boolean) throw ConfigError(key, "expected a boolean");
  return v.boolean;
}

std::vector<double> TomlDocument::get_number_array(const std::string& key) const {
  const TomlValue& v = require(key);
  if (v.kind != TomlValue::Kind::array) throw ConfigError(key, "expected an array");
  std::vector<double> out;
  for (const auto& e : v.array) {
    if (e.kind != TomlValue::Kind::number) throw ConfigError(key, "expected numeric entries");
    out.push_back(e.number);
  }
  return out;
}

const TomlValue& TomlDocument::get_array(const std::string& key) const {
  const TomlValue& v = require(key);
  if (v.kind != TomlValue::Kind::array) throw ConfigError(key, "expected an array");
  return v;
}

std::vector<std::string> TomlDocument::get_string_array(const std::string& key) const {
  const TomlValue& v = require(key);
  if (v.kind != TomlValue::Kind::array) throw ConfigError(key, "expected an array");
  std::vector<std::string> out;
  for (const auto& e : v.array) {
    if (e.kind != TomlValue::Kind::string) throw ConfigError(key, "expected string entries");
    out.push_back(e.str);
  }
  return out;
}

std::string TomlDocument::get_string_or(const std::string& key, const std::string& fallback) const {
  return contains(key) ? get_string(key) : fallback;
}

double TomlDocument::get_number_or(const std::string& key, double fallback) const {
  return contains(key) ? get_number(key) : fallback;
}

std::int64_t TomlDocument::get_integer_or(const std::string& key, std::int64_t fallback) const {
  return contains(key) ? get_integer(key) : fallback;
}

bool TomlDocument::get_bool_or(const std::string& key, bool fallback) const {
  return contains(key) ? get_bool(key) : fallback;
}

}  // namespace dynbc
