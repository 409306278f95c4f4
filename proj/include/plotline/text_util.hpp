#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace plotline::text {

// Number of UTF-8 code points (continuation bytes are not counted).
std::size_t codepoint_count(std::string_view s);

// Longest prefix of `s` holding at most `n` code points.
std::string_view codepoint_prefix(std::string_view s, std::size_t n);

std::string_view trim(std::string_view s);

bool is_valid_utf8(std::string_view s);

// 64-bit FNV-1a over the raw bytes; stable across platforms.
std::uint64_t fnv1a64(std::string_view bytes);

std::string hex64(std::uint64_t v);

// Shortest round-trip decimal form of a double.
std::string format_double(double v);

double parse_double(std::string_view s);

std::vector<std::string_view> split(std::string_view s, char sep);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace plotline::text
