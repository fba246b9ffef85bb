#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ghostmark/alphabet.hpp"

namespace ghostmark {

// Shape of a watermark space: |A|, m, n and j.
struct WatermarkParams {
  std::size_t alphabet_size = 4;
  std::size_t syllable_length = 4;  // m
  std::size_t total_syllables = 8;  // n
  std::size_t cue_syllables = 5;    // j

  std::size_t reply_syllables() const { return total_syllables - cue_syllables; }
  std::size_t cue_letters() const { return syllable_length * cue_syllables; }
  std::size_t reply_letters() const { return syllable_length * reply_syllables(); }

  // Throws ValidationError unless |A| >= 2, m >= 1 and 1 <= j < n.
  void validate() const;

  friend bool operator==(const WatermarkParams&, const WatermarkParams&) = default;
};

class Syllable {
 public:
  explicit Syllable(std::vector<Letter> letters);

  std::span<const Letter> letters() const noexcept { return letters_; }
  std::size_t size() const noexcept { return letters_.size(); }
  Letter operator[](std::size_t i) const { return letters_[i]; }

  friend bool operator==(const Syllable&, const Syllable&) = default;

 private:
  std::vector<Letter> letters_;
};

// Concatenates the letters of each syllable in order.
std::vector<Letter> flatten(std::span<const Syllable> syllables);

// True if `needle` occurs as a contiguous run inside `haystack`. An empty
// needle is contained everywhere.
bool contains_run(std::span<const Letter> haystack, std::span<const Letter> needle);

// An ordered list of n syllables; the first j form the cue, the rest the reply.
class Watermark {
 public:
  // Throws ValidationError on empty/mixed-length syllables or j outside [1, n).
  Watermark(std::vector<Syllable> syllables, std::size_t cue_length);

  // Parses the canonical form, e.g. "0.1.2.3-3.2.1.0-...;j=5".
  static Watermark parse(std::string_view canonical);

  std::size_t size() const noexcept { return syllables_.size(); }
  std::size_t cue_length() const noexcept { return cue_length_; }
  std::size_t reply_length() const noexcept { return size() - cue_length_; }
  std::size_t syllable_length() const noexcept { return syllables_.front().size(); }

  std::span<const Syllable> syllables() const noexcept { return syllables_; }
  const Syllable& syllable(std::size_t i) const { return syllables_.at(i); }
  std::span<const Syllable> cue() const noexcept {
    return std::span(syllables_).first(cue_length_);
  }
  std::span<const Syllable> reply() const noexcept {
    return std::span(syllables_).subspan(cue_length_);
  }

  std::span<const Letter> cue_letters() const noexcept { return cue_flat_; }
  std::span<const Letter> reply_letters() const noexcept { return reply_flat_; }

  // Syllable indices joined by "-", letters by ".", followed by ";j=<j>".
  std::string canonical() const;

  // True when |A|, m, n and j agree with `params` and every letter < |A|.
  bool fits(const WatermarkParams& params) const noexcept;

  friend bool operator==(const Watermark& a, const Watermark& b) {
    return a.cue_length_ == b.cue_length_ && a.syllables_ == b.syllables_;
  }

 private:
  std::vector<Syllable> syllables_;
  std::size_t cue_length_;
  std::vector<Letter> cue_flat_;
  std::vector<Letter> reply_flat_;
};

// UTF-8 rendering of a letter sequence.
std::string render_letters(std::span<const Letter> letters, const Alphabet& alphabet);
void append_letters(std::string& out, std::span<const Letter> letters,
                    const Alphabet& alphabet);

}  // namespace ghostmark
