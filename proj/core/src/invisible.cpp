#include "ghostmark/invisible.hpp"

#include "ghostmark/utf8.hpp"
#include "ghostmark/watermark.hpp"

namespace ghostmark {

Extraction extract_invisible(std::string_view text, const Alphabet& alphabet) {
  Extraction out;
  std::size_t i = 0;
  while (i < text.size()) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (c < 0x80) {
      ++i;
      continue;
    }
    const auto decoded = utf8::decode(text, i);
    if (!decoded) {
      ++out.invalid_bytes;
      ++i;
      continue;
    }
    if (const auto letter = alphabet.index_of(decoded->code_point)) {
      out.letters.push_back(*letter);
    }
    i += decoded->length;
  }
  return out;
}

bool detect_reply(std::string_view text, std::span<const Letter> reply,
                  const Alphabet& alphabet) {
  const Extraction e = extract_invisible(text, alphabet);
  return contains_run(e.letters, reply);
}

}  // namespace ghostmark
