#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ikde {

// Usage or configuration problem; the CLI maps it to exit code 2.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Flat key = value configuration.
//
//   # comment
//   seed = 7
//   [domain]          keys below become domain.<key>
//   kind = sparse
//
// Later layers override earlier ones: defaults < file < command-line flags.
class Config {
public:
  static Config parse(std::istream& in);
  static Config parse_file(const std::string& path);

  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
  bool has(const std::string& key) const { return values_.contains(key); }

  // Entries of `over` replace entries here.
  void merge(const Config& over);

  // Typed accessors throw ConfigError on missing keys or malformed values.
  std::string str(const std::string& key) const;
  std::string str(const std::string& key, const std::string& fallback) const;
  double real(const std::string& key) const;
  double real(const std::string& key, double fallback) const;
  std::int64_t integer(const std::string& key) const;
  std::int64_t integer(const std::string& key, std::int64_t fallback) const;
  std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback) const;
  bool boolean(const std::string& key, bool fallback) const;
  std::vector<double> reals(const std::string& key) const;
  std::vector<std::size_t> sizes(const std::string& key) const;

  // Every key in sorted order as "key = value" lines; parse() reads it back.
  std::string to_text() const;

  const std::map<std::string, std::string>& values() const { return values_; }

private:
  std::map<std::string, std::string> values_;
};

}  // namespace ikde
