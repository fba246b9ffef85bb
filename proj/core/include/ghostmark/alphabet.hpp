#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ghostmark {

// Index of a character within an Alphabet.
using Letter = std::uint8_t;

// Ordered set of non-rendering code points used to spell syllables.
class Alphabet {
 public:
  // {U+200B, U+200C, U+200D, U+2060}.
  static Alphabet standard();

  // Throws ValidationError if a code point repeats, is a word separator, is
  // not a known zero-width/format code point, or if fewer than 2 are given.
  explicit Alphabet(std::vector<char32_t> code_points);

  std::size_t size() const noexcept { return code_points_.size(); }
  char32_t code_point(Letter letter) const { return code_points_.at(letter); }
  std::span<const char32_t> code_points() const noexcept { return code_points_; }

  // UTF-8 bytes of a letter.
  std::string_view encoded(Letter letter) const { return encoded_.at(letter); }

  std::optional<Letter> index_of(char32_t code_point) const noexcept;
  bool contains(char32_t code_point) const noexcept {
    return index_of(code_point).has_value();
  }

  friend bool operator==(const Alphabet& a, const Alphabet& b) {
    return a.code_points_ == b.code_points_;
  }

 private:
  std::vector<char32_t> code_points_;
  std::vector<std::string> encoded_;
};

// True for the default-ignorable format characters an alphabet may draw from.
bool is_invisible_code_point(char32_t code_point);

}  // namespace ghostmark
