#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "ghostmark/alphabet.hpp"

namespace ghostmark {

struct Extraction {
  std::vector<Letter> letters;    // alphabet characters in order of appearance
  std::size_t invalid_bytes = 0;  // bytes skipped because they were not valid UTF-8
};

// Keeps only alphabet code points. Invalid UTF-8 is skipped byte by byte.
Extraction extract_invisible(std::string_view text, const Alphabet& alphabet);

// True if `reply` occurs as one contiguous run of the text's invisible stream.
bool detect_reply(std::string_view text, std::span<const Letter> reply,
                  const Alphabet& alphabet);

}  // namespace ghostmark
