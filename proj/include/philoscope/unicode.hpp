#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace philoscope::unicode {

// Byte offset of the first invalid UTF-8 sequence, or nullopt if valid.
std::optional<std::size_t> find_invalid_utf8(std::string_view text);

// Throws Error naming `context` and the byte offset when text is not UTF-8.
void require_utf8(std::string_view text, std::string_view context);

std::string nfc(std::string_view text);
bool is_nfc(std::string_view text);

// Full Unicode lowercasing with root-locale rules (final sigma handled).
std::string to_lower(std::string_view text);

std::u32string to_code_points(std::string_view text);
std::string to_utf8(std::u32string_view code_points);

bool is_whitespace(char32_t c);
bool is_punctuation(char32_t c);

// Strips Unicode white space from both ends.
std::string trim(std::string_view text);

}  // namespace philoscope::unicode
