#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace algnn {

/// Flat dotted-key configuration with typed leaves (int, real, bool, string).
/// Text form is one `key = value` per line, '#' comments; see docs/config.md
/// for the schema. Serialization round-trips losslessly: parse(serialize(c))
/// compares equal, value types included.
class Config {
 public:
  using Value = std::variant<std::int64_t, double, bool, std::string>;

  static Config parse(const std::string& text);
  static Config load(const std::string& path);
  std::string serialize() const;

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::int64_t get_int(const std::string& key, std::int64_t def) const;
  double get_real(const std::string& key, double def) const;
  bool get_bool(const std::string& key, bool def) const;
  std::string get_string(const std::string& key, const std::string& def) const;

  /// Comma-separated integer list stored as a string leaf.
  std::vector<std::int64_t> get_int_list(const std::string& key) const;

  void set(const std::string& key, std::int64_t v) { values_[key] = v; }
  void set(const std::string& key, double v) { values_[key] = v; }
  void set(const std::string& key, bool v) { values_[key] = v; }
  void set(const std::string& key, const std::string& v) { values_[key] = v; }
  void set(const std::string& key, const char* v) {
    values_[key] = std::string(v);
  }

  /// Types the raw text with the parser's literal rules (used by CLI
  /// `--set key=value` overrides).
  void set_from_text(const std::string& key, const std::string& raw);

  const std::map<std::string, Value>& values() const { return values_; }

  friend bool operator==(const Config&, const Config&) = default;

 private:
  std::map<std::string, Value> values_;
};

}  // namespace algnn
