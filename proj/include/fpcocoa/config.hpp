#pragma once

// Minimal structured-text configuration: one `key = value` per line, lists
// as comma-separated values, `#` starts a comment. Keys are case-sensitive.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fpcocoa::config {

class KeyValues {
 public:
  /// Throws FormatError (with the line number) on a line without '=' or a
  /// repeated key.
  static KeyValues parse(std::string_view text);
  /// Reads and parses a file; IoError if it cannot be read.
  static KeyValues load(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::map<std::string, std::string>& entries() const { return values_; }
  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }

  // Typed getters throw InvalidInput naming the key when the value does not parse.
  std::optional<std::string> string(const std::string& key) const;
  std::optional<double> number(const std::string& key) const;
  std::optional<long long> integer(const std::string& key) const;
  std::optional<std::uint64_t> unsignedInteger(const std::string& key) const;
  std::optional<bool> boolean(const std::string& key) const;
  std::optional<std::vector<double>> numberList(const std::string& key) const;
  std::optional<std::vector<int>> integerList(const std::string& key) const;

  /// Keys not in `known`, for typo detection.
  std::vector<std::string> unknownKeys(const std::vector<std::string>& known) const;

 private:
  std::map<std::string, std::string> values_;
};

std::string joinList(const std::vector<double>& values);
std::string joinList(const std::vector<int>& values);

}  // namespace fpcocoa::config
