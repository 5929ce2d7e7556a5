#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace smseg {

// Line-oriented key/value text: first whitespace-delimited token is the key,
// the remaining tokens are values. '#' starts a comment; blank lines are
// skipped. Duplicate keys are rejected so silently shadowed settings cannot
// slip through.
class KeyValueFile {
 public:
  static KeyValueFile load(const std::string& path);
  static KeyValueFile parse(const std::string& text, const std::string& origin);

  bool has(const std::string& key) const;

  // Accessors throw std::runtime_error naming the file, the key and the
  // problem when the key is missing or malformed.
  std::string get_string(const std::string& key) const;
  double get_double(const std::string& key) const;
  std::int64_t get_int(const std::string& key) const;
  std::uint64_t get_uint(const std::string& key) const;
  std::vector<double> get_doubles(const std::string& key, std::size_t expected_count) const;

  std::string get_string_or(const std::string& key, const std::string& fallback) const;
  double get_double_or(const std::string& key, double fallback) const;
  std::int64_t get_int_or(const std::string& key, std::int64_t fallback) const;

  const std::map<std::string, std::vector<std::string>>& entries() const { return entries_; }
  const std::string& origin() const { return origin_; }

 private:
  const std::vector<std::string>& tokens(const std::string& key) const;
  [[noreturn]] void fail(const std::string& key, const std::string& what) const;

  std::map<std::string, std::vector<std::string>> entries_;
  std::string origin_;
};

// Formats a double so that reading it back reproduces the exact value.
std::string format_double(double v);

// FNV-1a over a canonical text, used to stamp output manifests with the
// configuration that produced them.
std::uint64_t fnv1a_hash(const std::string& text);

}  // namespace smseg
