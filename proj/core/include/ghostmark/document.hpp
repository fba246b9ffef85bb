#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ghostmark/alphabet.hpp"

namespace ghostmark {

struct ByteRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const noexcept { return end - begin; }
  std::string_view in(std::string_view text) const {
    return text.substr(begin, end - begin);
  }
  friend bool operator==(const ByteRange&, const ByteRange&) = default;
};

// Words are maximal runs of non-separator code points. gaps[i] is the
// whitespace run following words[i] (empty after the last word when the text
// ends on a word); `leading` is whatever precedes the first word.
struct WordSplit {
  ByteRange leading;
  std::vector<ByteRange> words;
  std::vector<ByteRange> gaps;
};

// Throws EncodingError on invalid UTF-8.
WordSplit split_words(std::string_view text);

// Inverse of split_words: leading + (word + gap)*.
std::string rejoin(std::string_view text, const WordSplit& split);

enum class PreexistingPolicy {
  kReject,  // alphabet characters in the input are an error
  kStrip,   // remove them first and record the removal
};

// Removes every alphabet character; returns the number removed.
std::size_t strip_alphabet(std::string& text, const Alphabet& alphabet);

// Counts alphabet characters without modifying the text. Invalid bytes are
// skipped.
std::size_t count_alphabet(std::string_view text, const Alphabet& alphabet);

// Immutable text plus its word segmentation.
class Document {
 public:
  // Throws EncodingError for invalid UTF-8 and ValidationError when the text
  // carries alphabet characters under PreexistingPolicy::kReject.
  static Document create(std::string id, std::string text, const Alphabet& alphabet,
                         PreexistingPolicy policy = PreexistingPolicy::kReject);

  const std::string& id() const noexcept { return id_; }
  const std::string& text() const noexcept { return text_; }
  std::size_t word_count() const noexcept { return split_.words.size(); }
  std::span<const ByteRange> words() const noexcept { return split_.words; }
  std::string_view word(std::size_t i) const { return split_.words.at(i).in(text_); }
  std::string_view gap_after(std::size_t i) const { return split_.gaps.at(i).in(text_); }
  std::string_view leading() const { return split_.leading.in(text_); }
  const WordSplit& split() const noexcept { return split_; }

  // Alphabet characters removed under PreexistingPolicy::kStrip.
  std::size_t stripped_preexisting() const noexcept { return stripped_; }

 private:
  Document(std::string id, std::string text, WordSplit split, std::size_t stripped)
      : id_(std::move(id)), text_(std::move(text)), split_(std::move(split)),
        stripped_(stripped) {}

  std::string id_;
  std::string text_;
  WordSplit split_;
  std::size_t stripped_ = 0;
};

}  // namespace ghostmark
