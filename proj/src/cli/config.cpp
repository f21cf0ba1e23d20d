#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cctype>
#include <cmath>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "cglb/cli.hpp"
#include "cglb/errors.hpp"

namespace cglb::cli {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
    throw ConfigError("key '" + key + "': expected a number, got '" + text + "'");
  return v;
}

Config from_ptree(const boost::property_tree::ptree& tree) {
  Config cfg;
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError("key '" + section + "' must live inside a [section]");
    for (const auto& [key, value] : body) cfg.set(section + "." + key, value.data());
  }
  return cfg;
}

}  // namespace

Config Config::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_string(ss.str());
}

Config Config::from_string(const std::string& text) {
  std::istringstream in(text);
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return from_ptree(tree);
}

void Config::set(const std::string& key, const std::string& value) {
  values_[lower(trim(key))] = trim(value);
}

void Config::apply_environment(char** envp) {
  static const std::string prefix = "CGLB__";
  for (char** e = envp; e && *e; ++e) {
    const std::string entry(*e);
    if (entry.rfind(prefix, 0) != 0) continue;
    const auto eq = entry.find('=');
    if (eq == std::string::npos) continue;
    const std::string name = entry.substr(prefix.size(), eq - prefix.size());
    const auto sep = name.find("__");
    if (sep == std::string::npos || sep == 0 || sep + 2 >= name.size())
      throw ConfigError("environment override " + entry.substr(0, eq) +
                        " must look like CGLB__SECTION__KEY");
    set(lower(name.substr(0, sep)) + "." + lower(name.substr(sep + 2)), entry.substr(eq + 1));
  }
}

bool Config::has(const std::string& key) const {
  read_.insert(key);
  return values_.count(key) > 0;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  read_.insert(key);
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
  read_.insert(key);
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : parse_double(key, it->second);
}

std::optional<double> Config::get_optional(const std::string& key) const {
  read_.insert(key);
  const auto it = values_.find(key);
  if (it == values_.end() || it->second.empty() || lower(it->second) == "none") return std::nullopt;
  return parse_double(key, it->second);
}

long Config::get_int(const std::string& key, long fallback) const {
  const double v = get_double(key, double(fallback));
  if (v != std::floor(v)) throw ConfigError("key '" + key + "': expected an integer");
  return long(v);
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  read_.insert(key);
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const std::string v = lower(it->second);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("key '" + key + "': expected a boolean, got '" + it->second + "'");
}

std::vector<double> Config::get_list(const std::string& key,
                                     const std::vector<double>& fallback) const {
  read_.insert(key);
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<double> out;
  std::stringstream ss(it->second);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(key, item));
  if (out.empty()) throw ConfigError("key '" + key + "': empty list");
  return out;
}

void Config::reject_unread() const {
  std::string unknown;
  for (const auto& [k, v] : values_)
    if (!read_.count(k)) unknown += (unknown.empty() ? "" : ", ") + k;
  if (!unknown.empty()) throw ConfigError("unknown config keys: " + unknown);
}

void apply_environment_defaults(RunOptions& opts, char** envp, bool seed_set, bool threads_set,
                                bool out_set) {
  for (char** e = envp; e && *e; ++e) {
    const std::string entry(*e);
    const auto eq = entry.find('=');
    if (eq == std::string::npos) continue;
    const std::string name = entry.substr(0, eq), value = entry.substr(eq + 1);
    if (name == "CGLB_SEED" && !seed_set) {
      opts.seed = std::uint64_t(parse_double(name, value));
    } else if (name == "CGLB_THREADS" && !threads_set) {
      opts.threads = int(parse_double(name, value));
    } else if (name == "CGLB_OUT" && !out_set) {
      opts.out_dir = value;
    }
  }
  if (opts.threads < 1) throw ConfigError("threads must be at least 1");
}

}  // namespace cglb::cli
