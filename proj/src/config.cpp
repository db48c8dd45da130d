#include "membrane/config.hpp"

#include <charconv>
#include <cstdlib>
#include <cmath>
#include <fstream>
#include <sstream>

namespace membrane {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::optional<double> to_double(const std::string& word) {
  char* end = nullptr;
  const double v = std::strtod(word.c_str(), &end);
  if (word.empty() || end != word.c_str() + word.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::vector<std::string> split_words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(const std::string& text) {
  KeyValueConfig cfg;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string body = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config error: line " + std::to_string(line) + ": expected `key = value`");
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (key.empty()) throw ConfigError("config error: line " + std::to_string(line) + ": empty key");
    if (cfg.entries_.count(key))
      throw ConfigError("config error: line " + std::to_string(line) + ": duplicate key `" + key + "`");
    cfg.entries_[key] = {value, line};
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config error: cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

bool KeyValueConfig::has(const std::string& key) const { return entries_.count(key) > 0; }

const KeyValueConfig::Entry& KeyValueConfig::entry(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) throw ConfigError("config error: missing required key `" + key + "`");
  used_.insert(key);
  return it->second;
}

void KeyValueConfig::fail(const std::string& key, const std::string& message) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) throw ConfigError("config error: field `" + key + "`: " + message);
  throw ConfigError("config error: line " + std::to_string(it->second.line) + ": field `" + key + "`: " + message);
}

std::string KeyValueConfig::get_string(const std::string& key) const { return entry(key).value; }

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
  return has(key) ? get_string(key) : fallback;
}

double KeyValueConfig::get_double(const std::string& key) const {
  const auto v = to_double(entry(key).value);
  if (!v) fail(key, "expected a finite number, got `" + entry(key).value + "`");
  return *v;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

int KeyValueConfig::get_int(const std::string& key) const {
  const std::string& s = entry(key).value;
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) fail(key, "expected an integer, got `" + s + "`");
  return v;
}

int KeyValueConfig::get_int(const std::string& key, int fallback) const { return has(key) ? get_int(key) : fallback; }

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string s = get_string(key);
  if (s == "true" || s == "yes" || s == "1") return true;
  if (s == "false" || s == "no" || s == "0") return false;
  fail(key, "expected true or false, got `" + s + "`");
}

std::vector<double> KeyValueConfig::get_doubles(const std::string& key) const {
  std::vector<double> out;
  for (const std::string& w : split_words(entry(key).value)) {
    const auto v = to_double(w);
    if (!v) fail(key, "expected numbers, got `" + w + "`");
    out.push_back(*v);
  }
  return out;
}

std::vector<double> KeyValueConfig::get_doubles(const std::string& key, std::vector<double> fallback) const {
  return has(key) ? get_doubles(key) : fallback;
}

std::vector<std::string> KeyValueConfig::get_words(const std::string& key) const {
  return split_words(entry(key).value);
}

std::vector<Point> KeyValueConfig::get_points(const std::string& key) const {
  std::vector<Point> out;
  std::istringstream in(entry(key).value);
  for (std::string chunk; std::getline(in, chunk, ';');) {
    const auto words = split_words(chunk);
    if (words.empty()) continue;
    if (words.size() != 2) fail(key, "each point needs two coordinates");
    const auto x = to_double(words[0]), y = to_double(words[1]);
    if (!x || !y) fail(key, "point coordinates must be numbers");
    out.push_back({*x, *y});
  }
  return out;
}

void KeyValueConfig::reject_unused() const {
  for (const auto& [key, e] : entries_)
    if (!used_.count(key))
      throw ConfigError("config error: line " + std::to_string(e.line) + ": unknown key `" + key + "`");
}

}  // namespace membrane
