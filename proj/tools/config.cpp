#include "config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace critlab::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

bool valid_key(const std::string& k) {
  if (k.empty() || k.front() == '.' || k.back() == '.' || k.find("..") != std::string::npos) return false;
  for (char c : k)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_')) return false;
  return true;
}

template <class T>
bool parse_number(const std::string& s, T& out) {
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && p == end;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> items;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) items.push_back(trim(item));
  if (!s.empty() && s.back() == ',') items.push_back({});
  return items;
}

template <class T, class F>
std::string join(const std::vector<T>& v, F f) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + f(v[i]);
  return out;
}

}  // namespace

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

KeyValues KeyValues::parse(std::istream& in, const std::string& source) {
  KeyValues kv;
  std::string line;
  int lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    const std::string where = source + ":" + std::to_string(lineNo);
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!valid_key(key)) throw ConfigError(where + ": malformed key '" + key + "'");
    if (value.empty()) throw ConfigError(where + ": empty value for '" + key + "'");
    if (kv.entries_.contains(key)) throw ConfigError(where + ": duplicate key '" + key + "'");
    kv.entries_[key] = {value, where};
  }
  return kv;
}

KeyValues KeyValues::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  return parse(in, path);
}

void KeyValues::set(const std::string& key, const std::string& value) { entries_[key] = {value, "command line"}; }

const KeyValues::Entry* KeyValues::find(const std::string& key) {
  read_.insert(key);
  const auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

void KeyValues::bad(const std::string& key, const Entry& e, const std::string& expected) const {
  throw ConfigError(e.where + ": '" + key + "' = '" + e.value + "' is not " + expected);
}

double KeyValues::real(const std::string& key, double fallback) {
  double v = fallback;
  if (const Entry* e = find(key); e && (!parse_number(e->value, v) || !std::isfinite(v))) bad(key, *e, "a finite real");
  used_[key] = format_real(v);
  return v;
}

long KeyValues::integer(const std::string& key, long fallback) {
  long v = fallback;
  if (const Entry* e = find(key); e && !parse_number(e->value, v)) bad(key, *e, "an integer");
  used_[key] = std::to_string(v);
  return v;
}

std::uint64_t KeyValues::unsigned64(const std::string& key, std::uint64_t fallback) {
  std::uint64_t v = fallback;
  if (const Entry* e = find(key); e && !parse_number(e->value, v)) bad(key, *e, "an unsigned 64-bit integer");
  used_[key] = std::to_string(v);
  return v;
}

bool KeyValues::flag(const std::string& key, bool fallback) {
  bool v = fallback;
  if (const Entry* e = find(key)) {
    if (e->value == "true" || e->value == "1") v = true;
    else if (e->value == "false" || e->value == "0") v = false;
    else bad(key, *e, "true or false");
  }
  used_[key] = v ? "true" : "false";
  return v;
}

std::string KeyValues::text(const std::string& key, const std::string& fallback) {
  const Entry* e = find(key);
  std::string v = e ? e->value : fallback;
  used_[key] = v;
  return v;
}

std::vector<double> KeyValues::reals(const std::string& key, const std::vector<double>& fallback) {
  std::vector<double> v = fallback;
  if (const Entry* e = find(key)) {
    v.clear();
    for (const auto& item : split_list(e->value)) {
      double x = 0;
      if (!parse_number(item, x) || !std::isfinite(x)) bad(key, *e, "a comma-separated list of reals");
      v.push_back(x);
    }
  }
  used_[key] = join(v, format_real);
  return v;
}

std::vector<int> KeyValues::integers(const std::string& key, const std::vector<int>& fallback) {
  std::vector<int> v = fallback;
  if (const Entry* e = find(key)) {
    v.clear();
    for (const auto& item : split_list(e->value)) {
      int x = 0;
      if (!parse_number(item, x)) bad(key, *e, "a comma-separated list of integers");
      v.push_back(x);
    }
  }
  used_[key] = join(v, [](int x) { return std::to_string(x); });
  return v;
}

std::vector<std::string> KeyValues::words(const std::string& key, const std::vector<std::string>& fallback) {
  std::vector<std::string> v = fallback;
  if (const Entry* e = find(key)) {
    v = split_list(e->value);
    for (const auto& w : v)
      if (w.empty()) bad(key, *e, "a comma-separated list of words");
  }
  used_[key] = join(v, [](const std::string& s) { return s; });
  return v;
}

void KeyValues::reject_unknown() const {
  std::string unknown;
  for (const auto& [key, e] : entries_)
    if (!read_.contains(key)) unknown += (unknown.empty() ? "" : ", ") + key + " (" + e.where + ")";
  if (!unknown.empty()) throw ConfigError("unknown key(s): " + unknown);
}

}  // namespace critlab::cli
