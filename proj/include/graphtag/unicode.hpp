#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace graphtag {

// Splits UTF-8 text into one string per code point. Invalid bytes become
// single-byte pieces so the split never fails.
std::vector<std::string> utf8_chars(std::string_view text);
std::vector<char32_t> utf8_decode(std::string_view text);

// General category P* (punctuation) or Sk (modifier symbol, covers ` and ^).
bool is_punctuation_code_point(char32_t cp);
// Nonempty token made only of punctuation code points.
bool is_pure_punctuation(std::string_view token);

std::string ascii_lower(std::string_view s);

}  // namespace graphtag
