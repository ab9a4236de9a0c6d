#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace kgp::text {

std::string_view trim(std::string_view s);
std::string_view trim_right(std::string_view s);
std::string to_lower_ascii(std::string_view s);
bool iequals(std::string_view a, std::string_view b);
bool istarts_with(std::string_view s, std::string_view prefix);

/// Splits on '\n'; a trailing newline does not produce an empty last element.
std::vector<std::string_view> split_lines(std::string_view s);

/// Replaces "\r\n" and lone "\r" with "\n".
std::string normalize_newlines(std::string_view s);

/// Truncates to at most `max_bytes` without splitting a UTF-8 sequence.
std::string_view utf8_truncate(std::string_view s, std::size_t max_bytes);

/// Lowercase hex SHA-256 of the bytes of `s`.
std::string sha256_hex(std::string_view s);

/// Case-insensitive, whitespace-normalized key used to resolve wiki titles.
std::string title_key(std::string_view title);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace kgp::text
