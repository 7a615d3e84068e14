#include "vdsa/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "vdsa/errors.hpp"

namespace vdsa {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

template <class T>
std::optional<T> parse_number(const std::string& text) {
  T value{};
  const char* begin = text.data();
  const char* end = begin + text.size();
  if (!text.empty() && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || begin == end) return std::nullopt;
  return value;
}

}  // namespace

FlatConfig FlatConfig::parse(const std::string& text, const std::string& origin) {
  FlatConfig cfg;
  cfg.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(number) + ": expected `key = value`");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError(origin + ":" + std::to_string(number) + ": empty key");
    if (cfg.values_.count(key)) {
      throw ConfigError(origin + ":" + std::to_string(number) + ": duplicate key `" + key + "`");
    }
    cfg.values_[key] = trim(line.substr(eq + 1));
  }
  return cfg;
}

FlatConfig FlatConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str(), path.string());
}

const std::string* FlatConfig::raw(const std::string& key) {
  consumed_.insert(key);
  const auto it = values_.find(key);
  return it == values_.end() ? nullptr : &it->second;
}

void FlatConfig::fail(const std::string& key, const std::string& what) const {
  throw ConfigError(origin_ + ": key `" + key + "`: " + what);
}

std::string FlatConfig::get_string(const std::string& key, const std::string& fallback) {
  const auto* v = raw(key);
  return v ? *v : fallback;
}

double FlatConfig::get_double(const std::string& key, double fallback) {
  const auto* v = raw(key);
  if (!v) return fallback;
  const auto parsed = parse_number<double>(*v);
  if (!parsed) fail(key, "expected a number, got `" + *v + "`");
  return *parsed;
}

int FlatConfig::get_int(const std::string& key, int fallback) {
  const auto* v = raw(key);
  if (!v) return fallback;
  const auto parsed = parse_number<int>(*v);
  if (!parsed) fail(key, "expected an integer, got `" + *v + "`");
  return *parsed;
}

std::uint64_t FlatConfig::get_u64(const std::string& key, std::uint64_t fallback) {
  const auto* v = raw(key);
  if (!v) return fallback;
  const auto parsed = parse_number<std::uint64_t>(*v);
  if (!parsed) fail(key, "expected a non-negative integer, got `" + *v + "`");
  return *parsed;
}

bool FlatConfig::get_bool(const std::string& key, bool fallback) {
  const auto* v = raw(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  fail(key, "expected true/false, got `" + *v + "`");
}

std::vector<double> FlatConfig::get_doubles(const std::string& key,
                                            const std::vector<double>& fallback) {
  const auto* v = raw(key);
  if (!v) return fallback;
  std::vector<double> out;
  if (v->empty()) return out;
  for (const auto& item : split(*v, ',')) {
    const auto parsed = parse_number<double>(item);
    if (!parsed) fail(key, "bad list element `" + item + "`");
    out.push_back(*parsed);
  }
  return out;
}

std::vector<int> FlatConfig::get_ints(const std::string& key, const std::vector<int>& fallback) {
  const auto* v = raw(key);
  if (!v) return fallback;
  std::vector<int> out;
  if (v->empty()) return out;
  for (const auto& item : split(*v, ',')) {
    const auto parsed = parse_number<int>(item);
    if (!parsed) fail(key, "bad list element `" + item + "`");
    out.push_back(*parsed);
  }
  return out;
}

std::vector<std::vector<double>> FlatConfig::get_groups(const std::string& key) {
  const auto* v = raw(key);
  std::vector<std::vector<double>> out;
  if (!v || v->empty()) return out;
  for (const auto& group : split(*v, ';')) {
    if (group.empty()) continue;
    std::vector<double> row;
    for (const auto& item : split(group, ',')) {
      const auto parsed = parse_number<double>(item);
      if (!parsed) fail(key, "bad group element `" + item + "`");
      row.push_back(*parsed);
    }
    out.push_back(std::move(row));
  }
  return out;
}

void FlatConfig::reject_unknown() const {
  std::string unknown;
  for (const auto& [key, value] : values_) {
    if (!consumed_.count(key)) unknown += (unknown.empty() ? "" : ", ") + key;
  }
  if (!unknown.empty()) throw ConfigError(origin_ + ": unknown key(s): " + unknown);
}

std::string FlatConfig::canonical() const {
  std::string out;
  for (const auto& [key, value] : values_) out += key + "=" + value + "\n";
  return out;
}

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace vdsa
