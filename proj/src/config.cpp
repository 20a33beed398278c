#include "fibrebend/config.hpp"

#include "fibrebend/errors.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <fstream>
#include <sstream>

namespace fibrebend {

namespace pt = boost::property_tree;

Config parse_config(const std::string& text) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ValidationError("config: " + std::string(e.what()));
  }
  Config out;
  for (const auto& [name, node] : tree) {
    if (node.empty()) {
      out[""][name] = node.data();
      continue;
    }
    auto& section = out[name];
    for (const auto& [key, value] : node) {
      if (!value.empty()) throw ValidationError("config: nested key in [" + name + "]");
      section[key] = value.data();
    }
  }
  return out;
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

KvReader::KvReader(const KeyValues& kv, std::string section) : kv_(kv), section_(std::move(section)) {}

const std::string* KvReader::lookup(const std::string& key) {
  auto it = kv_.find(key);
  if (it == kv_.end()) return nullptr;
  used_.insert(key);
  return &it->second;
}

double KvReader::get_double(const std::string& key, double fallback) {
  const auto* v = lookup(key);
  if (!v) return fallback;
  std::size_t pos = 0;
  double out = 0.0;
  try {
    out = std::stod(*v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != v->size())
    throw ValidationError("[" + section_ + "] " + key + ": expected a number, got '" + *v + "'");
  return out;
}

int KvReader::get_int(const std::string& key, int fallback) {
  const auto* v = lookup(key);
  if (!v) return fallback;
  std::size_t pos = 0;
  int out = 0;
  try {
    out = std::stoi(*v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != v->size())
    throw ValidationError("[" + section_ + "] " + key + ": expected an integer, got '" + *v + "'");
  return out;
}

bool KvReader::get_bool(const std::string& key, bool fallback) {
  const auto* v = lookup(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  throw ValidationError("[" + section_ + "] " + key + ": expected a boolean, got '" + *v + "'");
}

std::string KvReader::get_string(const std::string& key, const std::string& fallback) {
  const auto* v = lookup(key);
  return v ? *v : fallback;
}

void KvReader::finish() const {
  for (const auto& [key, value] : kv_) {
    if (!used_.count(key)) throw ValidationError("[" + section_ + "] unknown key '" + key + "'");
  }
}

}  // namespace fibrebend
