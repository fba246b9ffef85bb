#pragma once

#include <span>
#include <string_view>

namespace ghostmark {

// Fixed word list for synthetic text, including multi-byte UTF-8 entries.
std::span<const std::string_view> lexicon();

}  // namespace ghostmark
