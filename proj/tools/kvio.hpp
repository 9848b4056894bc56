#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace diiv::cli {

// Flat dotted-key configuration / report format: one `key = value` per
// line, '#' comments, blank lines ignored. Order-preserving.
class KvFile {
 public:
  static KvFile parse_file(const std::string& path);
  static KvFile parse_text(const std::string& text);

  const std::string* find(const std::string& key) const;
  bool has(const std::string& key) const { return find(key) != nullptr; }

  std::string get_string(const std::string& key) const;
  double get_double(const std::string& key) const;
  std::int64_t get_int(const std::string& key) const;
  std::uint64_t get_uint(const std::string& key) const;

  const std::vector<std::pair<std::string, std::string>>& entries() const {
    return entries_;
  }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

// Shortest round-trip decimal form (to_chars); integers and specials
// print naturally.
std::string format_double(double v);

class KvWriter {
 public:
  void put(const std::string& key, const std::string& value);
  void put(const std::string& key, double value);
  void put(const std::string& key, std::int64_t value);
  void put(const std::string& key, std::uint64_t value);

  const std::string& text() const { return text_; }

 private:
  std::string text_;
};

void write_file(const std::string& path, const std::string& contents);

}  // namespace diiv::cli
