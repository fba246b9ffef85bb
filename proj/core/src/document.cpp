#include "ghostmark/document.hpp"

#include "ghostmark/error.hpp"
#include "ghostmark/utf8.hpp"

namespace ghostmark {

WordSplit split_words(std::string_view text) {
  WordSplit out;
  std::size_t i = 0;
  bool in_word = false;
  std::size_t run_start = 0;
  while (i < text.size()) {
    const auto d = utf8::decode(text, i);
    if (!d) throw EncodingError("invalid UTF-8 at byte " + std::to_string(i), i);
    const bool sep = utf8::is_word_separator(d->code_point);
    if (sep && in_word) {
      out.words.push_back({run_start, i});
      in_word = false;
      run_start = i;
    } else if (!sep && !in_word) {
      if (out.words.empty()) {
        out.leading = {0, i};
      } else {
        out.gaps.push_back({run_start, i});
      }
      in_word = true;
      run_start = i;
    }
    i += d->length;
  }
  if (in_word) {
    out.words.push_back({run_start, text.size()});
    out.gaps.push_back({text.size(), text.size()});
  } else if (out.words.empty()) {
    out.leading = {0, text.size()};
  } else {
    out.gaps.push_back({run_start, text.size()});
  }
  return out;
}

std::string rejoin(std::string_view text, const WordSplit& split) {
  std::string out(split.leading.in(text));
  for (std::size_t i = 0; i < split.words.size(); ++i) {
    out += split.words[i].in(text);
    out += split.gaps[i].in(text);
  }
  return out;
}

std::size_t strip_alphabet(std::string& text, const Alphabet& alphabet) {
  std::string out;
  out.reserve(text.size());
  std::size_t removed = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    const auto d = utf8::decode(text, i);
    if (!d) {
      out.push_back(text[i++]);
      continue;
    }
    if (alphabet.contains(d->code_point)) {
      ++removed;
    } else {
      out.append(text, i, d->length);
    }
    i += d->length;
  }
  text = std::move(out);
  return removed;
}

std::size_t count_alphabet(std::string_view text, const Alphabet& alphabet) {
  std::size_t count = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    const auto d = utf8::decode(text, i);
    if (!d) {
      ++i;
      continue;
    }
    if (alphabet.contains(d->code_point)) ++count;
    i += d->length;
  }
  return count;
}

Document Document::create(std::string id, std::string text, const Alphabet& alphabet,
                          PreexistingPolicy policy) {
  if (const auto bad = utf8::find_invalid(text)) {
    throw EncodingError("document '" + id + "': invalid UTF-8 at byte " +
                            std::to_string(*bad),
                        *bad);
  }
  std::size_t stripped = 0;
  if (policy == PreexistingPolicy::kStrip) {
    stripped = strip_alphabet(text, alphabet);
  } else if (const std::size_t found = count_alphabet(text, alphabet); found > 0) {
    throw ValidationError("document '" + id + "' already contains " +
                          std::to_string(found) +
                          " alphabet character(s); use strip mode to remove them");
  }
  WordSplit split = split_words(text);
  return Document(std::move(id), std::move(text), std::move(split), stripped);
}

}  // namespace ghostmark
