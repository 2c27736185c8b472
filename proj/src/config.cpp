#include "fpcocoa/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <limits>
#include <string>

#include "fpcocoa/csv.hpp"
#include "fpcocoa/errors.hpp"

namespace fpcocoa::config {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string> splitList(const std::string& value) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = value.find(',', start);
    const auto item = trim(std::string_view(value).substr(start, comma - start));
    if (!item.empty()) out.emplace_back(item);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

InvalidInput badValue(const std::string& key, const std::string& value, const char* expected) {
  return InvalidInput("config key '" + key + "': expected " + expected + ", got '" + value + "'");
}

long long parseInteger(const std::string& key, const std::string& text) {
  long long v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) throw badValue(key, text, "an integer");
  return v;
}

double parseDouble(const std::string& key, const std::string& text) {
  try {
    return csv::parseNumber(text);
  } catch (const FormatError&) {
    throw badValue(key, text, "a number");
  }
}

}  // namespace

KeyValues KeyValues::parse(std::string_view text) {
  KeyValues out;
  int lineNo = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto nl = text.find('\n', start);
    std::string_view line = text.substr(start, nl == std::string_view::npos ? text.size() - start : nl - start);
    ++lineNo;
    start = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw FormatError("config line " + std::to_string(lineNo) + ": expected key = value");
    }
    const std::string key(trim(line.substr(0, eq)));
    if (key.empty()) throw FormatError("config line " + std::to_string(lineNo) + ": empty key");
    if (out.values_.count(key)) {
      throw FormatError("config line " + std::to_string(lineNo) + ": duplicate key '" + key + "'");
    }
    out.values_[key] = std::string(trim(line.substr(eq + 1)));
  }
  return out;
}

KeyValues KeyValues::load(const std::string& path) { return parse(csv::readFile(path)); }

std::optional<std::string> KeyValues::string(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::optional<double> KeyValues::number(const std::string& key) const {
  const auto s = string(key);
  if (!s) return std::nullopt;
  return parseDouble(key, *s);
}

std::optional<long long> KeyValues::integer(const std::string& key) const {
  const auto s = string(key);
  if (!s) return std::nullopt;
  return parseInteger(key, *s);
}

std::optional<std::uint64_t> KeyValues::unsignedInteger(const std::string& key) const {
  const auto s = string(key);
  if (!s) return std::nullopt;
  std::uint64_t v = 0;
  const auto* end = s->data() + s->size();
  const auto [ptr, ec] = std::from_chars(s->data(), end, v);
  if (ec != std::errc() || ptr != end) throw badValue(key, *s, "a non-negative integer");
  return v;
}

std::optional<bool> KeyValues::boolean(const std::string& key) const {
  const auto s = string(key);
  if (!s) return std::nullopt;
  if (*s == "true" || *s == "1" || *s == "yes" || *s == "on") return true;
  if (*s == "false" || *s == "0" || *s == "no" || *s == "off") return false;
  throw badValue(key, *s, "a boolean");
}

std::optional<std::vector<double>> KeyValues::numberList(const std::string& key) const {
  const auto s = string(key);
  if (!s) return std::nullopt;
  std::vector<double> out;
  for (const auto& item : splitList(*s)) out.push_back(parseDouble(key, item));
  return out;
}

std::optional<std::vector<int>> KeyValues::integerList(const std::string& key) const {
  const auto s = string(key);
  if (!s) return std::nullopt;
  std::vector<int> out;
  for (const auto& item : splitList(*s)) {
    const long long v = parseInteger(key, item);
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
      throw badValue(key, item, "an integer in int range");
    }
    out.push_back(static_cast<int>(v));
  }
  return out;
}

std::vector<std::string> KeyValues::unknownKeys(const std::vector<std::string>& known) const {
  std::vector<std::string> out;
  for (const auto& [key, value] : values_) {
    if (std::find(known.begin(), known.end(), key) == known.end()) out.push_back(key);
  }
  return out;
}

std::string joinList(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += csv::formatNumber(values[i]);
  }
  return out;
}

std::string joinList(const std::vector<int>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(values[i]);
  }
  return out;
}

}  // namespace fpcocoa::config
