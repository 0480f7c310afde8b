#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "critlab/errors.hpp"

namespace critlab::cli {

// Malformed or unknown configuration. Exit status 1, like any precondition.
class ConfigError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

// Flat key=value text. '#' starts a comment, blank lines are ignored, keys are
// dotted words, a key may appear once. Values are read through typed getters;
// every getter records the canonical text it used, so after all engine
// parameters have been read, any key nobody asked for is unknown.
class KeyValues {
 public:
  static KeyValues parse(std::istream& in, const std::string& source = "config");
  static KeyValues load(const std::string& path);

  void set(const std::string& key, const std::string& value);  // command-line override
  bool has(const std::string& key) const { return entries_.contains(key); }

  double real(const std::string& key, double fallback);
  long integer(const std::string& key, long fallback);
  std::uint64_t unsigned64(const std::string& key, std::uint64_t fallback);
  bool flag(const std::string& key, bool fallback);
  std::string text(const std::string& key, const std::string& fallback);
  std::vector<double> reals(const std::string& key, const std::vector<double>& fallback);
  std::vector<int> integers(const std::string& key, const std::vector<int>& fallback);
  std::vector<std::string> words(const std::string& key, const std::vector<std::string>& fallback);

  // throws ConfigError naming every key no getter asked for
  void reject_unknown() const;

  // canonical values of everything read, defaults included
  const std::map<std::string, std::string>& used() const { return used_; }

 private:
  struct Entry {
    std::string value;
    std::string where;
  };
  const Entry* find(const std::string& key);
  [[noreturn]] void bad(const std::string& key, const Entry& e, const std::string& expected) const;

  std::map<std::string, Entry> entries_;
  std::set<std::string> read_;
  std::map<std::string, std::string> used_;
};

std::string format_real(double v);  // 12 significant digits

}  // namespace critlab::cli
