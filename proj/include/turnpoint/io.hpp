// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The turnpoint Authors

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace turnpoint::io {

/// Shortest decimal text that reads back to the same double.
std::string format_double(double value);

/// Parses a full string as a double; throws ParseError otherwise.
double parse_double(std::string_view text);
long long parse_integer(std::string_view text);

std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Splits CSV text into rows of trimmed fields; blank lines are dropped.
/// Quoting is not supported (no field in our formats needs it).
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

std::string_view trim(std::string_view s) noexcept;

}  // namespace turnpoint::io
