#pragma once

// Line-oriented `key = value` configuration with `[section]` headers.

#include <filesystem>
#include <map>
#include <set>
#include <string>

namespace fibrebend {

using KeyValues = std::map<std::string, std::string>;
using Config = std::map<std::string, KeyValues>;

Config parse_config(const std::string& text);
Config load_config(const std::filesystem::path& path);

/// Typed access to one section. Every key must be consumed before
/// `finish()`, so misspelled overrides are reported instead of ignored.
class KvReader {
 public:
  KvReader(const KeyValues& kv, std::string section);

  double get_double(const std::string& key, double fallback);
  int get_int(const std::string& key, int fallback);
  bool get_bool(const std::string& key, bool fallback);
  std::string get_string(const std::string& key, const std::string& fallback);
  bool has(const std::string& key) const { return kv_.count(key) != 0; }

  void finish() const;

 private:
  const std::string* lookup(const std::string& key);

  const KeyValues& kv_;
  std::string section_;
  std::set<std::string> used_;
};

}  // namespace fibrebend
