#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ghostmark/alphabet.hpp"
#include "ghostmark/document.hpp"
#include "ghostmark/watermark.hpp"

namespace ghostmark {

enum class DeltaMode {
  kHalfDocument,  // delta = ceil(words / 2): one cue chunk, one reply chunk
  kFixed,
};

struct EmbedParams {
  static constexpr std::size_t kDefaultStep = 8;

  DeltaMode delta_mode = DeltaMode::kHalfDocument;
  std::size_t fixed_delta = 0;
  std::size_t step = kDefaultStep;
  std::size_t overlap = 1;  // o: trailing cue syllables repeated in reply chunks

  // Chunk size for a document of `word_count` words (never below 2).
  std::size_t delta_for(std::size_t word_count) const;

  // Throws ValidationError unless step >= 1, 1 <= o < j < n and, in fixed
  // mode, delta >= 2.
  void validate(std::size_t cue_syllables, std::size_t total_syllables) const;

  // "half-doc" or "fixed:N".
  static EmbedParams parse_delta_mode(const std::string& text);
  static EmbedParams parse_delta_mode(const std::string& text, EmbedParams base);
  std::string delta_mode_string() const;
};

struct Element {
  enum class Kind : std::uint8_t { kWord, kMark };

  Kind kind;
  std::uint32_t index;  // word index for kWord, 0-based syllable index for kMark

  static Element word(std::size_t i) { return {Kind::kWord, static_cast<std::uint32_t>(i)}; }
  static Element mark(std::size_t s) { return {Kind::kMark, static_cast<std::uint32_t>(s)}; }
  bool is_word() const noexcept { return kind == Kind::kWord; }
  friend bool operator==(const Element&, const Element&) = default;
};

enum class ChunkKind { kCue, kReply, kUnmarked };

const char* to_string(ChunkKind kind);

struct Chunk {
  ChunkKind kind;
  std::size_t first_word;
  std::size_t end_word;  // exclusive
  std::size_t first_element;
  std::size_t end_element;  // exclusive

  std::size_t word_count() const noexcept { return end_word - first_word; }
};

// Interleaves words [first_word, first_word + word_count) with `syllables`:
// the first syllable after the first word, then one every `step` words while
// at least one word would follow it, cycling through the list. An incomplete
// final cycle is finished after the last word. Throws ValidationError for an
// empty word range or syllable list.
void chunk_mark(std::size_t first_word, std::size_t word_count,
                std::span<const std::size_t> syllables, std::size_t step,
                std::vector<Element>& out);
std::vector<Element> chunk_mark(std::size_t first_word, std::size_t word_count,
                                std::span<const std::size_t> syllables, std::size_t step);

// Document interleaved with the syllables of one watermark.
class MarkedDocument {
 public:
  MarkedDocument(std::shared_ptr<const Document> original, Watermark watermark,
                 EmbedParams params, std::size_t delta, std::vector<Element> elements,
                 std::vector<Chunk> chunks);

  const Document& original() const noexcept { return *original_; }
  std::shared_ptr<const Document> original_ptr() const noexcept { return original_; }
  const Watermark& watermark() const noexcept { return watermark_; }
  std::string watermark_id() const { return watermark_.canonical(); }
  const EmbedParams& params() const noexcept { return params_; }
  std::size_t delta() const noexcept { return delta_; }
  std::span<const Element> elements() const noexcept { return elements_; }
  std::span<const Chunk> chunks() const noexcept { return chunks_; }

  // Complete cue/reply chunk pairs, i.e. the number of challenges.
  std::size_t pair_count() const noexcept;

  // Full marked text: syllables sit directly after the word they follow,
  // original whitespace is kept verbatim.
  std::string render(const Alphabet& alphabet) const;

  // Text of elements [first, end): words with the gaps between them, no
  // leading or trailing whitespace.
  void render_range(std::string& out, std::size_t first, std::size_t end,
                    const Alphabet& alphabet) const;

 private:
  std::shared_ptr<const Document> original_;
  Watermark watermark_;
  EmbedParams params_;
  std::size_t delta_;
  std::vector<Element> elements_;
  std::vector<Chunk> chunks_;
};

// Chunks the document and marks odd chunks with s_1..s_{j-o} and even chunks
// with s_{j-o+1}..s_n. Words that cannot form another cue/reply pair are left
// unmarked at the end. A document too short for even one pair is split into a
// cue chunk of min(delta, words-1) words and a reply chunk of the rest.
// Throws ValidationError for documents under 2 words or invalid params.
MarkedDocument mark(std::shared_ptr<const Document> doc, const Watermark& w,
                    const EmbedParams& params);
MarkedDocument mark(const Document& doc, const Watermark& w, const EmbedParams& params);

// Rebuilds the visible text from the Word elements alone.
std::string strip_marks(const MarkedDocument& md);

// Removes alphabet characters from rendered text.
std::string strip_invisible(std::string_view text, const Alphabet& alphabet);

// Complete signal repetitions in a chunk of `words` words carrying a signal
// of `signal_length` syllables.
std::size_t sub_repetitions(std::size_t words, std::size_t signal_length, std::size_t step);

struct RepetitionCount {
  std::size_t cue = 0;    // repetitions of s_1..s_{j-o}
  std::size_t reply = 0;  // repetitions of s_{j-o+1}..s_n

  std::size_t total() const noexcept { return cue + reply; }
  friend bool operator==(const RepetitionCount&, const RepetitionCount&) = default;
};

// Closed-form repetition totals for a document of `word_count` words.
RepetitionCount repetition_count(std::size_t word_count, const EmbedParams& params,
                                 std::size_t cue_syllables, std::size_t total_syllables);

struct DensityReport {
  std::size_t documents = 0;
  std::size_t min_words = 0;
  std::size_t max_words = 0;
  double mean_words = 0.0;
  double std_words = 0.0;
  double mean_repetitions = 0.0;  // signal repetitions per text
  double approx_per_32_words = 0.0;
  std::size_t short_documents = 0;  // under 200 words
};

DensityReport density_report(std::span<const MarkedDocument> docs);

}  // namespace ghostmark
