#include "smseg/config_text.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace smseg {

namespace {

std::vector<std::string> split_tokens(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

double parse_double(const std::string& s, bool* ok) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    *ok = used == s.size();
    return v;
  } catch (const std::exception&) {
    *ok = false;
    return 0.0;
  }
}

}  // namespace

KeyValueFile KeyValueFile::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path);
}

KeyValueFile KeyValueFile::parse(const std::string& text, const std::string& origin) {
  KeyValueFile kv;
  kv.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto toks = split_tokens(line);
    if (toks.empty()) continue;
    std::string key = toks.front();
    toks.erase(toks.begin());
    if (kv.entries_.count(key)) {
      throw std::runtime_error(origin + ":" + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
    kv.entries_.emplace(std::move(key), std::move(toks));
  }
  return kv;
}

bool KeyValueFile::has(const std::string& key) const { return entries_.count(key) != 0; }

const std::vector<std::string>& KeyValueFile::tokens(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) fail(key, "missing required key");
  return it->second;
}

void KeyValueFile::fail(const std::string& key, const std::string& what) const {
  throw std::runtime_error(origin_ + ": key '" + key + "': " + what);
}

std::string KeyValueFile::get_string(const std::string& key) const {
  const auto& t = tokens(key);
  if (t.size() != 1) fail(key, "expected exactly one value");
  return t.front();
}

double KeyValueFile::get_double(const std::string& key) const {
  const auto& t = tokens(key);
  if (t.size() != 1) fail(key, "expected exactly one numeric value");
  bool ok = false;
  const double v = parse_double(t.front(), &ok);
  if (!ok) fail(key, "'" + t.front() + "' is not a number");
  return v;
}

std::int64_t KeyValueFile::get_int(const std::string& key) const {
  const auto& t = tokens(key);
  if (t.size() != 1) fail(key, "expected exactly one integer value");
  std::int64_t v = 0;
  const auto* first = t.front().data();
  const auto* last = first + t.front().size();
  auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last) fail(key, "'" + t.front() + "' is not an integer");
  return v;
}

std::uint64_t KeyValueFile::get_uint(const std::string& key) const {
  const auto& t = tokens(key);
  if (t.size() != 1) fail(key, "expected exactly one unsigned integer value");
  std::uint64_t v = 0;
  const auto* first = t.front().data();
  const auto* last = first + t.front().size();
  auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last) fail(key, "'" + t.front() + "' is not an unsigned integer");
  return v;
}

std::vector<double> KeyValueFile::get_doubles(const std::string& key, std::size_t expected_count) const {
  const auto& t = tokens(key);
  if (t.size() != expected_count) {
    fail(key, "expected " + std::to_string(expected_count) + " values, found " + std::to_string(t.size()));
  }
  std::vector<double> out;
  out.reserve(t.size());
  for (const auto& s : t) {
    bool ok = false;
    out.push_back(parse_double(s, &ok));
    if (!ok) fail(key, "'" + s + "' is not a number");
  }
  return out;
}

std::string KeyValueFile::get_string_or(const std::string& key, const std::string& fallback) const {
  return has(key) ? get_string(key) : fallback;
}

double KeyValueFile::get_double_or(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

std::int64_t KeyValueFile::get_int_or(const std::string& key, std::int64_t fallback) const {
  return has(key) ? get_int(key) : fallback;
}

std::string format_double(double v) {
  // Shortest decimal form that parses back to the exact same double.
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::uint64_t fnv1a_hash(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace smseg
