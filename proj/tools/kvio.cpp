#include "kvio.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "diiv/errors.hpp"

namespace diiv::cli {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

KvFile KvFile::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw InvalidInputError("cannot open file: " + path);
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_text(ss.str());
}

KvFile KvFile::parse_text(const std::string& text) {
  KvFile kv;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos) {
      throw InvalidInputError("line " + std::to_string(lineno) +
                              ": expected `key = value`");
    }
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (key.empty()) {
      throw InvalidInputError("line " + std::to_string(lineno) + ": empty key");
    }
    for (const auto& [k, v] : kv.entries_) {
      if (k == key) {
        throw InvalidInputError("duplicate key: " + key);
      }
    }
    kv.entries_.emplace_back(std::move(key), std::move(value));
  }
  return kv;
}

const std::string* KvFile::find(const std::string& key) const {
  for (const auto& [k, v] : entries_) {
    if (k == key) return &v;
  }
  return nullptr;
}

std::string KvFile::get_string(const std::string& key) const {
  const std::string* v = find(key);
  if (v == nullptr) throw InvalidInputError("missing key: " + key);
  return *v;
}

double KvFile::get_double(const std::string& key) const {
  const std::string text = get_string(key);
  double out = 0.0;
  const char* b = text.data();
  const char* e = b + text.size();
  if (!text.empty() && text[0] == '+') ++b;  // from_chars rejects leading '+'
  auto [p, ec] = std::from_chars(b, e, out);
  if (ec != std::errc{} || p != e) {
    throw InvalidInputError("key " + key + ": not a number: " + text);
  }
  return out;
}

std::int64_t KvFile::get_int(const std::string& key) const {
  const std::string text = get_string(key);
  std::int64_t out = 0;
  const char* b = text.data();
  const char* e = b + text.size();
  if (!text.empty() && text[0] == '+') ++b;
  auto [p, ec] = std::from_chars(b, e, out);
  if (ec != std::errc{} || p != e) {
    throw InvalidInputError("key " + key + ": not an integer: " + text);
  }
  return out;
}

std::uint64_t KvFile::get_uint(const std::string& key) const {
  const std::int64_t v = get_int(key);
  if (v < 0) throw InvalidInputError("key " + key + ": must be nonnegative");
  return static_cast<std::uint64_t>(v);
}

std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, p);
}

void KvWriter::put(const std::string& key, const std::string& value) {
  text_ += key;
  text_ += " = ";
  text_ += value;
  text_ += '\n';
}

void KvWriter::put(const std::string& key, double value) {
  put(key, format_double(value));
}

void KvWriter::put(const std::string& key, std::int64_t value) {
  put(key, std::to_string(value));
}

void KvWriter::put(const std::string& key, std::uint64_t value) {
  put(key, std::to_string(value));
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw InvalidInputError("cannot write file: " + path);
  }
  out << contents;
}

}  // namespace diiv::cli
