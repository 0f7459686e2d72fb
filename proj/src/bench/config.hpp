#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace uld::bench {

// Flat key-value experiment config. One `key = value` per line; `#` starts a
// comment; values are numbers, booleans, quoted-or-bare strings, or arrays in
// brackets. Every successful lookup is echoed (key, resolved value) so the
// manifest can record the exact parameterization, including defaults.
class Config {
 public:
  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text);

  bool has(const std::string& key) const;

  double number(const std::string& key) const;
  double number(const std::string& key, double fallback) const;
  long integer(const std::string& key) const;
  long integer(const std::string& key, long fallback) const;
  bool boolean(const std::string& key, bool fallback) const;
  std::string str(const std::string& key) const;
  std::string str(const std::string& key, const std::string& fallback) const;
  std::vector<double> array(const std::string& key) const;
  std::vector<double> array(const std::string& key, const std::vector<double>& fallback) const;

  const std::string& raw_text() const { return raw_; }
  const std::map<std::string, std::string>& resolved() const { return resolved_; }

 private:
  std::string raw_;
  std::map<std::string, std::string> values_;
  mutable std::map<std::string, std::string> resolved_;

  const std::string* find(const std::string& key) const;
  void echo(const std::string& key, const std::string& value) const;
};

}  // namespace uld::bench
