#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace fpcocoa::csv {

/// 17 significant digits; parses back to the same double. +inf/-inf/nan are
/// written as "inf", "-inf", "nan".
std::string formatNumber(double v);

/// Quotes the field only if it contains a comma, quote, CR or LF.
std::string escapeField(std::string_view field);

std::string joinRow(const std::vector<std::string>& fields);

/// RFC-4180 parser (quoted fields, doubled quotes, LF or CRLF line ends).
std::vector<std::vector<std::string>> parse(std::string_view text);

/// Whole-file helpers. Failures throw IoError carrying the path.
std::string readFile(const std::string& path);
void writeFile(const std::string& path, std::string_view contents);

double parseNumber(const std::string& field);

}  // namespace fpcocoa::csv
