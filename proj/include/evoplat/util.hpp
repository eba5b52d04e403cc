#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace evoplat {

std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
std::vector<std::string> split_lines(std::string_view text);

// Strict numeric parsing: the whole (trimmed) string must be consumed.
// Throws ConfigError with `what` naming the offending value.
long long parse_int(std::string_view s, std::string_view what);
double parse_double(std::string_view s, std::string_view what);
bool parse_bool(std::string_view s, std::string_view what);

// Shortest round-trip decimal form ('.' separator, locale-free).
std::string format_double(double v);
// Fixed-precision form, for SVG coordinates.
std::string format_fixed(double v, int precision);

std::string read_text_file(const std::string& path);
// Writes to <path>.tmp then renames, so readers never observe a torn file.
void write_text_file_atomic(const std::string& path, const std::string& content);

bool file_exists(const std::string& path);

}  // namespace evoplat
