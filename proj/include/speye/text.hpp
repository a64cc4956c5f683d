#pragma once

#include <string>
#include <string_view>
#include <vector>

/// ASCII string helpers shared by the parsers.
namespace speye::text {

std::string to_lower(std::string_view s);
std::string_view trim(std::string_view s);

/// Collapses whitespace runs (including U+00A0) to one space, trims, and
/// lowercases ASCII letters.
std::string normalize(std::string_view s);

bool iequals(std::string_view a, std::string_view b);
bool istarts_with(std::string_view s, std::string_view prefix);

/// Position of `needle` in `haystack` where both ends of the match sit on a
/// non-alphanumeric boundary, or npos.
std::size_t find_word(std::string_view haystack, std::string_view needle);

std::vector<std::string> split(std::string_view s, char delimiter);

}  // namespace speye::text
