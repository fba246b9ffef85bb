#include "ghostmark/alphabet.hpp"

#include <algorithm>

#include "ghostmark/error.hpp"
#include "ghostmark/utf8.hpp"

namespace ghostmark {

bool is_invisible_code_point(char32_t cp) {
  if (cp == 0x00AD || cp == 0x034F || cp == 0x061C || cp == 0x180E ||
      cp == 0xFEFF) {
    return true;
  }
  if (cp >= 0x200B && cp <= 0x200F) return true;
  if (cp >= 0x202A && cp <= 0x202E) return true;
  if (cp >= 0x2060 && cp <= 0x2064) return true;
  if (cp >= 0x2066 && cp <= 0x206F) return true;
  if (cp >= 0xE0000 && cp <= 0xE007F) return true;  // tag characters
  return false;
}

Alphabet Alphabet::standard() {
  return Alphabet({0x200B, 0x200C, 0x200D, 0x2060});
}

Alphabet::Alphabet(std::vector<char32_t> code_points)
    : code_points_(std::move(code_points)) {
  if (code_points_.size() < 2) {
    throw ValidationError("alphabet needs at least 2 characters");
  }
  if (code_points_.size() > 256) {
    throw ValidationError("alphabet is limited to 256 characters");
  }
  for (std::size_t i = 0; i < code_points_.size(); ++i) {
    const char32_t cp = code_points_[i];
    if (utf8::is_word_separator(cp)) {
      throw ValidationError("alphabet character " + utf8::format_code_point(cp) +
                            " is a word separator");
    }
    if (!is_invisible_code_point(cp)) {
      throw ValidationError("alphabet character " + utf8::format_code_point(cp) +
                            " is not a zero-width code point");
    }
    if (std::find(code_points_.begin(), code_points_.begin() + i, cp) !=
        code_points_.begin() + i) {
      throw ValidationError("duplicate alphabet character " +
                            utf8::format_code_point(cp));
    }
    encoded_.push_back(utf8::encode(cp));
  }
}

std::optional<Letter> Alphabet::index_of(char32_t cp) const noexcept {
  for (std::size_t i = 0; i < code_points_.size(); ++i) {
    if (code_points_[i] == cp) return static_cast<Letter>(i);
  }
  return std::nullopt;
}

}  // namespace ghostmark
