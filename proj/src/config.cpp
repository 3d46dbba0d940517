#include "algnn/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace algnn {

namespace {

std::string trim(const std::string& s) {
  std::size_t lo = 0, hi = s.size();
  while (lo < hi && std::isspace(static_cast<unsigned char>(s[lo]))) ++lo;
  while (hi > lo && std::isspace(static_cast<unsigned char>(s[hi - 1]))) --hi;
  return s.substr(lo, hi - lo);
}

bool valid_key(const std::string& key) {
  if (key.empty()) return false;
  for (char c : key)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '.')
      return false;
  return true;
}

bool parse_int(const std::string& s, std::int64_t& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

bool parse_real(const std::string& s, double& out) {
  if (s.empty()) return false;
  // Require a '.', 'e', or special form so integers stay integers.
  if (s.find_first_of(".eE") == std::string::npos && s != "inf" &&
      s != "-inf" && s != "nan")
    return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

Config::Value type_literal(const std::string& raw) {
  if (raw == "true") return true;
  if (raw == "false") return false;
  std::int64_t i;
  if (parse_int(raw, i)) return i;
  double d;
  if (parse_real(raw, d)) return d;
  if (raw.size() >= 2 && raw.front() == '"' && raw.back() == '"') {
    std::string s;
    for (std::size_t p = 1; p + 1 < raw.size(); ++p) {
      if (raw[p] == '\\' && p + 2 < raw.size()) ++p;
      s += raw[p];
    }
    return s;
  }
  return raw;
}

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s(buf);
  // Keep reals typed as reals on reparse.
  if (s.find_first_of(".eE") == std::string::npos && s != "inf" &&
      s != "-inf" && s != "nan")
    s += ".0";
  return s;
}

std::string format_string(const std::string& s) {
  bool needs_quotes = s.empty();
  for (char c : s)
    if (std::isspace(static_cast<unsigned char>(c)) || c == '"' || c == '#')
      needs_quotes = true;
  // A string that would reparse as another type must be quoted.
  if (!needs_quotes) {
    const Config::Value v = type_literal(s);
    needs_quotes = !std::holds_alternative<std::string>(v);
  }
  if (!needs_quotes) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

Config Config::parse(const std::string& text) {
  Config config;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    // Strip comments outside quotes.
    std::string body;
    bool in_quotes = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char c = line[i];
      if (c == '"' && (i == 0 || line[i - 1] != '\\')) in_quotes = !in_quotes;
      if (c == '#' && !in_quotes) break;
      body += c;
    }
    body = trim(body);
    if (body.empty()) continue;
    const std::size_t eq = body.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(line_no) +
                               ": expected key = value");
    const std::string key = trim(body.substr(0, eq));
    const std::string raw = trim(body.substr(eq + 1));
    if (!valid_key(key))
      throw std::runtime_error("config line " + std::to_string(line_no) +
                               ": bad key '" + key + "'");
    config.values_[key] = type_literal(raw);
  }
  return config;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::string Config::serialize() const {
  std::string out;
  for (const auto& [key, value] : values_) {
    out += key;
    out += " = ";
    if (std::holds_alternative<std::int64_t>(value)) {
      out += std::to_string(std::get<std::int64_t>(value));
    } else if (std::holds_alternative<double>(value)) {
      out += format_real(std::get<double>(value));
    } else if (std::holds_alternative<bool>(value)) {
      out += std::get<bool>(value) ? "true" : "false";
    } else {
      out += format_string(std::get<std::string>(value));
    }
    out += '\n';
  }
  return out;
}

std::int64_t Config::get_int(const std::string& key, std::int64_t def) const {
  auto it = values_.find(key);
  if (it == values_.end()) return def;
  if (const auto* v = std::get_if<std::int64_t>(&it->second)) return *v;
  throw std::runtime_error("config key '" + key + "' is not an integer");
}

double Config::get_real(const std::string& key, double def) const {
  auto it = values_.find(key);
  if (it == values_.end()) return def;
  if (const auto* v = std::get_if<double>(&it->second)) return *v;
  if (const auto* v = std::get_if<std::int64_t>(&it->second))
    return static_cast<double>(*v);
  throw std::runtime_error("config key '" + key + "' is not a real");
}

bool Config::get_bool(const std::string& key, bool def) const {
  auto it = values_.find(key);
  if (it == values_.end()) return def;
  if (const auto* v = std::get_if<bool>(&it->second)) return *v;
  throw std::runtime_error("config key '" + key + "' is not a bool");
}

std::string Config::get_string(const std::string& key,
                               const std::string& def) const {
  auto it = values_.find(key);
  if (it == values_.end()) return def;
  if (const auto* v = std::get_if<std::string>(&it->second)) return *v;
  throw std::runtime_error("config key '" + key + "' is not a string");
}

std::vector<std::int64_t> Config::get_int_list(const std::string& key) const {
  std::vector<std::int64_t> out;
  auto it = values_.find(key);
  if (it == values_.end()) return out;
  if (const auto* v = std::get_if<std::int64_t>(&it->second)) {
    out.push_back(*v);
    return out;
  }
  const std::string s = get_string(key, "");
  std::size_t pos = 0;
  while (pos < s.size()) {
    std::size_t comma = s.find(',', pos);
    if (comma == std::string::npos) comma = s.size();
    const std::string item = trim(s.substr(pos, comma - pos));
    if (!item.empty()) {
      std::int64_t v;
      if (!parse_int(item, v))
        throw std::runtime_error("config key '" + key +
                                 "': bad integer list item '" + item + "'");
      out.push_back(v);
    }
    pos = comma + 1;
  }
  return out;
}

void Config::set_from_text(const std::string& key, const std::string& raw) {
  if (!valid_key(key))
    throw std::runtime_error("bad config key '" + key + "'");
  values_[key] = type_literal(trim(raw));
}

}  // namespace algnn
