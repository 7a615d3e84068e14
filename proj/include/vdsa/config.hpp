#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace vdsa {

/// Flat `key = value` document. `#` starts a comment; blank lines are
/// ignored; list values are comma-separated. Every accessor marks its key as
/// consumed so that unknown keys can be rejected after parsing.
class FlatConfig {
 public:
  FlatConfig() = default;

  static FlatConfig parse(const std::string& text, const std::string& origin = "<string>");
  /// Throws IoError if the file cannot be read.
  static FlatConfig load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  std::string get_string(const std::string& key, const std::string& fallback);
  double get_double(const std::string& key, double fallback);
  int get_int(const std::string& key, int fallback);
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback);
  bool get_bool(const std::string& key, bool fallback);
  std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fallback);
  std::vector<int> get_ints(const std::string& key, const std::vector<int>& fallback);
  /// Semicolon-separated groups, e.g. `2,10,30,0.4; 1,50,60,0.2`.
  std::vector<std::vector<double>> get_groups(const std::string& key);

  /// Throws ConfigError naming every key no accessor asked for.
  void reject_unknown() const;

  /// Canonical `key=value\n` listing, sorted by key. Used for hashing.
  std::string canonical() const;
  const std::string& origin() const { return origin_; }

 private:
  const std::string* raw(const std::string& key);
  [[noreturn]] void fail(const std::string& key, const std::string& what) const;

  std::map<std::string, std::string> values_;
  std::set<std::string> consumed_;
  std::string origin_ = "<string>";
};

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(const std::string& text);

}  // namespace vdsa
