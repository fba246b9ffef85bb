#include "ghostmark/watermark.hpp"

#include <algorithm>
#include <charconv>

#include "ghostmark/error.hpp"

namespace ghostmark {

void WatermarkParams::validate() const {
  if (alphabet_size < 2 || alphabet_size > 256) {
    throw ValidationError("alphabet size must be in [2, 256]");
  }
  if (syllable_length < 1) throw ValidationError("syllable length m must be >= 1");
  if (cue_syllables < 1 || cue_syllables >= total_syllables) {
    throw ValidationError("cue length j must satisfy 1 <= j < n (j=" +
                          std::to_string(cue_syllables) +
                          ", n=" + std::to_string(total_syllables) + ")");
  }
}

Syllable::Syllable(std::vector<Letter> letters) : letters_(std::move(letters)) {
  if (letters_.empty()) throw ValidationError("syllable must not be empty");
}

std::vector<Letter> flatten(std::span<const Syllable> syllables) {
  std::vector<Letter> out;
  for (const auto& s : syllables) {
    out.insert(out.end(), s.letters().begin(), s.letters().end());
  }
  return out;
}

bool contains_run(std::span<const Letter> haystack, std::span<const Letter> needle) {
  if (needle.empty()) return true;
  if (needle.size() > haystack.size()) return false;
  return std::search(haystack.begin(), haystack.end(), needle.begin(),
                     needle.end()) != haystack.end();
}

Watermark::Watermark(std::vector<Syllable> syllables, std::size_t cue_length)
    : syllables_(std::move(syllables)), cue_length_(cue_length) {
  if (syllables_.size() < 2) {
    throw ValidationError("watermark needs at least 2 syllables");
  }
  if (cue_length_ < 1 || cue_length_ >= syllables_.size()) {
    throw ValidationError("cue length must satisfy 1 <= j < n");
  }
  const std::size_t m = syllables_.front().size();
  for (const auto& s : syllables_) {
    if (s.size() != m) throw ValidationError("syllables must share one length m");
  }
  cue_flat_ = flatten(cue());
  reply_flat_ = flatten(reply());
}

std::string Watermark::canonical() const {
  std::string out;
  for (std::size_t i = 0; i < syllables_.size(); ++i) {
    if (i > 0) out.push_back('-');
    const auto letters = syllables_[i].letters();
    for (std::size_t k = 0; k < letters.size(); ++k) {
      if (k > 0) out.push_back('.');
      out += std::to_string(letters[k]);
    }
  }
  out += ";j=" + std::to_string(cue_length_);
  return out;
}

Watermark Watermark::parse(std::string_view text) {
  const auto bad = [&](const char* why) {
    return ValidationError(std::string("malformed watermark '") + std::string(text) +
                           "': " + why);
  };
  const auto sep = text.rfind(";j=");
  if (sep == std::string_view::npos) throw bad("missing ';j='");
  std::size_t j = 0;
  const auto j_text = text.substr(sep + 3);
  {
    const auto [ptr, ec] = std::from_chars(j_text.data(), j_text.data() + j_text.size(), j);
    if (ec != std::errc() || ptr != j_text.data() + j_text.size()) throw bad("bad j");
  }
  std::vector<Syllable> syllables;
  std::string_view body = text.substr(0, sep);
  while (true) {
    const auto dash = body.find('-');
    std::string_view chunk = body.substr(0, dash);
    std::vector<Letter> letters;
    while (true) {
      const auto dot = chunk.find('.');
      const std::string_view num = chunk.substr(0, dot);
      unsigned value = 0;
      const auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), value);
      if (num.empty() || ec != std::errc() || ptr != num.data() + num.size() ||
          value > 255) {
        throw bad("bad letter");
      }
      letters.push_back(static_cast<Letter>(value));
      if (dot == std::string_view::npos) break;
      chunk.remove_prefix(dot + 1);
    }
    syllables.emplace_back(std::move(letters));
    if (dash == std::string_view::npos) break;
    body.remove_prefix(dash + 1);
  }
  return Watermark(std::move(syllables), j);
}

bool Watermark::fits(const WatermarkParams& p) const noexcept {
  if (size() != p.total_syllables || cue_length_ != p.cue_syllables ||
      syllable_length() != p.syllable_length) {
    return false;
  }
  for (const auto& s : syllables_) {
    for (Letter l : s.letters()) {
      if (l >= p.alphabet_size) return false;
    }
  }
  return true;
}

void append_letters(std::string& out, std::span<const Letter> letters,
                    const Alphabet& alphabet) {
  for (Letter l : letters) out += alphabet.encoded(l);
}

std::string render_letters(std::span<const Letter> letters, const Alphabet& alphabet) {
  std::string out;
  out.reserve(letters.size() * 3);
  append_letters(out, letters, alphabet);
  return out;
}

}  // namespace ghostmark
