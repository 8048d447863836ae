#include "graphtag/unicode.hpp"

#include <algorithm>
#include <array>
#include <utility>

namespace graphtag {

namespace {

struct Range {
  char32_t lo, hi;
};

constexpr Range kPunctuation[] = {
#include "punctuation_ranges.inc"
};

// Length of the UTF-8 sequence starting at byte b, or 0 if b cannot start one.
std::size_t sequence_length(unsigned char b) {
  if (b < 0x80) return 1;
  if ((b >> 5) == 0x6) return 2;
  if ((b >> 4) == 0xE) return 3;
  if ((b >> 3) == 0x1E) return 4;
  return 0;
}

// Decodes one code point at text[i]; returns {cp, bytes consumed}. Malformed
// input yields the raw byte as its own code point.
std::pair<char32_t, std::size_t> decode_at(std::string_view text, std::size_t i) {
  const auto b0 = static_cast<unsigned char>(text[i]);
  const std::size_t len = sequence_length(b0);
  if (len <= 1 || i + len > text.size()) return {b0, 1};
  char32_t cp = b0 & (0x7F >> len);
  for (std::size_t k = 1; k < len; ++k) {
    const auto b = static_cast<unsigned char>(text[i + k]);
    if ((b >> 6) != 0x2) return {b0, 1};
    cp = (cp << 6) | (b & 0x3F);
  }
  return {cp, len};
}

}  // namespace

std::vector<std::string> utf8_chars(std::string_view text) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < text.size();) {
    const std::size_t len = decode_at(text, i).second;
    out.emplace_back(text.substr(i, len));
    i += len;
  }
  return out;
}

std::vector<char32_t> utf8_decode(std::string_view text) {
  std::vector<char32_t> out;
  for (std::size_t i = 0; i < text.size();) {
    const auto [cp, len] = decode_at(text, i);
    out.push_back(cp);
    i += len;
  }
  return out;
}

bool is_punctuation_code_point(char32_t cp) {
  const auto it = std::upper_bound(std::begin(kPunctuation), std::end(kPunctuation), cp,
                                   [](char32_t v, const Range& r) { return v < r.lo; });
  if (it == std::begin(kPunctuation)) return false;
  return cp <= std::prev(it)->hi;
}

bool is_pure_punctuation(std::string_view token) {
  if (token.empty()) return false;
  const auto cps = utf8_decode(token);
  return std::all_of(cps.begin(), cps.end(), is_punctuation_code_point);
}

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

}  // namespace graphtag
