#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace ghostmark::utf8 {

struct Decoded {
  char32_t code_point;
  std::size_t length;  // bytes consumed
};

// Strict decoder: rejects overlong forms, surrogates and values past U+10FFFF.
// Returns nullopt if the bytes at `offset` do not start a valid sequence.
std::optional<Decoded> decode(std::string_view bytes, std::size_t offset);

// Returns the offset of the first invalid byte, or nullopt for valid UTF-8.
std::optional<std::size_t> find_invalid(std::string_view bytes);

void append(std::string& out, char32_t code_point);
std::string encode(char32_t code_point);

// "U+200B" style, at least four hex digits.
std::string format_code_point(char32_t code_point);
std::optional<char32_t> parse_code_point(std::string_view text);

// Whitespace used for word splitting: category Zs plus \t, \n, \r.
bool is_word_separator(char32_t code_point);

}  // namespace ghostmark::utf8
