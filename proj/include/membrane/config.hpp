#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "membrane/grid.hpp"

namespace membrane {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// `key = value` text with `#` comments. Every getter records the key as used
/// so leftovers can be reported as unknown.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(const std::string& text);
  static KeyValueConfig load(const std::string& path);

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& key) const;
  std::vector<double> get_doubles(const std::string& key, std::vector<double> fallback) const;
  std::vector<std::string> get_words(const std::string& key) const;
  /// `x y; x y; ...`
  std::vector<Point> get_points(const std::string& key) const;

  /// Throws ConfigError naming the first key nobody asked for.
  void reject_unused() const;
  /// ConfigError prefixed with the key's line number.
  [[noreturn]] void fail(const std::string& key, const std::string& message) const;

 private:
  struct Entry {
    std::string value;
    int line = 0;
  };
  const Entry& entry(const std::string& key) const;

  std::map<std::string, Entry> entries_;
  mutable std::set<std::string> used_;
};

}  // namespace membrane
