// SPDX-License-Identifier: Apache-2.0
//
// Small helpers shared by the flat-file formats.
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace garble {

/// Shortest decimal that parses back to the same double.
std::string format_double(double value);

/// Strict full-string parse; throws a data error naming `what` on failure.
double parse_double(std::string_view text, std::string_view what);
long long parse_int(std::string_view text, std::string_view what);

std::vector<std::string_view> split(std::string_view text, char sep);

/// Reads a whole file as LF-separated lines. A trailing CR is stripped.
std::vector<std::string> read_lines(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, std::string_view contents);

/// 64-bit FNV-1a, rendered as 16 hex digits.
std::string fnv1a_hex(std::string_view bytes);

}  // namespace garble
