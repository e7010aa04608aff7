#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace codecheck {

std::string_view trim(std::string_view text) noexcept;
std::string to_lower(std::string_view text);
bool iequals(std::string_view a, std::string_view b) noexcept;
bool istarts_with(std::string_view text, std::string_view prefix) noexcept;

std::vector<std::string_view> split_lines(std::string_view text);

/// Whitespace-delimited token count. This is the token proxy used wherever a
/// provider does not report usage.
std::size_t whitespace_token_count(std::string_view text) noexcept;

/// Shortest decimal text that round-trips to the same double.
std::string format_number(double value);

/// Throws Error{FileNotFound} when absent, Error{IoError} on read failure.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view content);

} // namespace codecheck
