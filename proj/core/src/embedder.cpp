#include "ghostmark/embedder.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

#include "ghostmark/error.hpp"
#include "ghostmark/utf8.hpp"

namespace ghostmark {

namespace {

std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

void append_chunk(std::vector<Chunk>& chunks, ChunkKind kind, std::size_t first_word,
                  std::size_t end_word, std::size_t first_element, std::size_t end_element) {
  chunks.push_back({kind, first_word, end_word, first_element, end_element});
}

}  // namespace

std::size_t EmbedParams::delta_for(std::size_t word_count) const {
  if (delta_mode == DeltaMode::kFixed) return fixed_delta;
  return std::max<std::size_t>(2, ceil_div(word_count, 2));
}

void EmbedParams::validate(std::size_t cue_syllables, std::size_t total_syllables) const {
  if (step < 1) throw ValidationError("step must be at least 1");
  if (overlap < 1 || overlap >= cue_syllables) {
    throw ValidationError("overlap must satisfy 1 <= o < j");
  }
  if (cue_syllables >= total_syllables) throw ValidationError("j must be below n");
  if (delta_mode == DeltaMode::kFixed && fixed_delta < 2) {
    throw ValidationError("fixed chunk size must be at least 2 words");
  }
}

EmbedParams EmbedParams::parse_delta_mode(const std::string& text, EmbedParams base) {
  if (text == "half-doc") {
    base.delta_mode = DeltaMode::kHalfDocument;
    base.fixed_delta = 0;
    return base;
  }
  constexpr std::string_view kPrefix = "fixed:";
  if (text.rfind(kPrefix, 0) == 0) {
    const char* first = text.data() + kPrefix.size();
    const char* last = text.data() + text.size();
    std::size_t value = 0;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec == std::errc() && ptr == last && value >= 2) {
      base.delta_mode = DeltaMode::kFixed;
      base.fixed_delta = value;
      return base;
    }
  }
  throw ValidationError("bad delta mode '" + text + "' (expected half-doc or fixed:N, N >= 2)");
}

EmbedParams EmbedParams::parse_delta_mode(const std::string& text) {
  return parse_delta_mode(text, EmbedParams{});
}

std::string EmbedParams::delta_mode_string() const {
  if (delta_mode == DeltaMode::kHalfDocument) return "half-doc";
  return "fixed:" + std::to_string(fixed_delta);
}

const char* to_string(ChunkKind kind) {
  switch (kind) {
    case ChunkKind::kCue:
      return "cue";
    case ChunkKind::kReply:
      return "reply";
    case ChunkKind::kUnmarked:
      return "unmarked";
  }
  return "unknown";
}

void chunk_mark(std::size_t first_word, std::size_t word_count,
                std::span<const std::size_t> syllables, std::size_t step,
                std::vector<Element>& out) {
  if (word_count == 0) throw ValidationError("chunk has no words");
  if (syllables.empty()) throw ValidationError("chunk has no syllables");
  if (step == 0) throw ValidationError("step must be at least 1");
  const std::size_t cycle = syllables.size();

  out.push_back(Element::word(first_word));
  out.push_back(Element::mark(syllables[0]));
  std::size_t x = 1;
  std::size_t y = 1 % cycle;
  while (x + step < word_count) {
    for (std::size_t i = x; i < x + step; ++i) out.push_back(Element::word(first_word + i));
    out.push_back(Element::mark(syllables[y]));
    y = (y + 1) % cycle;
    x += step;
  }
  for (std::size_t i = x; i < word_count; ++i) out.push_back(Element::word(first_word + i));
  while (y != 0) {
    out.push_back(Element::mark(syllables[y]));
    y = (y + 1) % cycle;
  }
}

std::vector<Element> chunk_mark(std::size_t first_word, std::size_t word_count,
                                std::span<const std::size_t> syllables, std::size_t step) {
  std::vector<Element> out;
  chunk_mark(first_word, word_count, syllables, step, out);
  return out;
}

MarkedDocument::MarkedDocument(std::shared_ptr<const Document> original, Watermark watermark,
                               EmbedParams params, std::size_t delta,
                               std::vector<Element> elements, std::vector<Chunk> chunks)
    : original_(std::move(original)),
      watermark_(std::move(watermark)),
      params_(params),
      delta_(delta),
      elements_(std::move(elements)),
      chunks_(std::move(chunks)) {}

std::size_t MarkedDocument::pair_count() const noexcept {
  return static_cast<std::size_t>(std::count_if(
      chunks_.begin(), chunks_.end(), [](const Chunk& c) { return c.kind == ChunkKind::kReply; }));
}

void MarkedDocument::render_range(std::string& out, std::size_t first, std::size_t end,
                                  const Alphabet& alphabet) const {
  bool pending_gap = false;
  std::size_t previous_word = 0;
  for (std::size_t e = first; e < end; ++e) {
    const Element& el = elements_[e];
    if (el.is_word()) {
      if (pending_gap) out.append(original_->gap_after(previous_word));
      out.append(original_->word(el.index));
      previous_word = el.index;
      pending_gap = true;
    } else {
      append_letters(out, watermark_.syllable(el.index).letters(), alphabet);
    }
  }
}

std::string MarkedDocument::render(const Alphabet& alphabet) const {
  std::string out;
  const std::size_t marks = elements_.size() - original_->word_count();
  out.reserve(original_->text().size() +
              marks * watermark_.syllable_length() * alphabet.encoded(0).size());
  out.append(original_->leading());
  render_range(out, 0, elements_.size(), alphabet);
  if (original_->word_count() > 0) out.append(original_->gap_after(original_->word_count() - 1));
  return out;
}

MarkedDocument mark(std::shared_ptr<const Document> doc, const Watermark& w,
                    const EmbedParams& params) {
  const std::size_t j = w.cue_length();
  const std::size_t n = w.size();
  params.validate(j, n);
  const std::size_t total = doc->word_count();
  if (total < 2) {
    throw ValidationError("document '" + doc->id() + "' has fewer than 2 words");
  }
  const std::size_t delta = params.delta_for(total);

  std::vector<std::size_t> cue_syllables(j - params.overlap);
  std::iota(cue_syllables.begin(), cue_syllables.end(), 0);
  std::vector<std::size_t> reply_syllables(n - j + params.overlap);
  std::iota(reply_syllables.begin(), reply_syllables.end(), j - params.overlap);

  std::vector<Element> elements;
  elements.reserve(total + 2 * (total / std::max<std::size_t>(params.step, 1) + n));
  std::vector<Chunk> chunks;

  auto add = [&](ChunkKind kind, std::size_t begin, std::size_t end,
                 std::span<const std::size_t> syllables) {
    const std::size_t first_element = elements.size();
    chunk_mark(begin, end - begin, syllables, params.step, elements);
    append_chunk(chunks, kind, begin, end, first_element, elements.size());
  };

  std::size_t x = 0;
  while (x + 1 + delta < total) {
    add(ChunkKind::kCue, x, x + delta, cue_syllables);
    x += delta;
    add(ChunkKind::kReply, x, std::min(x + delta, total), reply_syllables);
    x += delta;
  }
  if (chunks.empty()) {
    const std::size_t cue_words = std::min(delta, total - 1);
    add(ChunkKind::kCue, 0, cue_words, cue_syllables);
    add(ChunkKind::kReply, cue_words, total, reply_syllables);
  } else if (x < total) {
    const std::size_t first_element = elements.size();
    for (std::size_t i = x; i < total; ++i) elements.push_back(Element::word(i));
    append_chunk(chunks, ChunkKind::kUnmarked, x, total, first_element, elements.size());
  }
  return MarkedDocument(std::move(doc), w, params, delta, std::move(elements),
                        std::move(chunks));
}

MarkedDocument mark(const Document& doc, const Watermark& w, const EmbedParams& params) {
  return mark(std::make_shared<const Document>(doc), w, params);
}

std::string strip_marks(const MarkedDocument& md) {
  const Document& doc = md.original();
  std::string out(doc.leading());
  bool first = true;
  std::size_t previous = 0;
  for (const Element& el : md.elements()) {
    if (!el.is_word()) continue;
    if (!first) out.append(doc.gap_after(previous));
    out.append(doc.word(el.index));
    previous = el.index;
    first = false;
  }
  if (!first) out.append(doc.gap_after(previous));
  return out;
}

std::string strip_invisible(std::string_view text, const Alphabet& alphabet) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    const auto decoded = utf8::decode(text, i);
    if (!decoded) {
      out.push_back(text[i]);
      ++i;
      continue;
    }
    if (!alphabet.contains(decoded->code_point)) out.append(text.substr(i, decoded->length));
    i += decoded->length;
  }
  return out;
}

std::size_t sub_repetitions(std::size_t words, std::size_t signal_length, std::size_t step) {
  if (signal_length == 0 || step == 0) throw ValidationError("signal length and step must be positive");
  const std::size_t inserted = 1 + (std::max<std::size_t>(words, 2) - 2) / step;
  return ceil_div(inserted, signal_length);
}

RepetitionCount repetition_count(std::size_t word_count, const EmbedParams& params,
                                 std::size_t cue_syllables, std::size_t total_syllables) {
  params.validate(cue_syllables, total_syllables);
  if (word_count < 2) throw ValidationError("document has fewer than 2 words");
  const std::size_t delta = params.delta_for(word_count);
  const std::size_t cue_signal = cue_syllables - params.overlap;
  const std::size_t reply_signal = total_syllables - cue_syllables + params.overlap;

  RepetitionCount count;
  const std::size_t pairs =
      word_count > delta + 1 ? ceil_div(word_count - delta - 1, 2 * delta) : 0;
  if (pairs == 0) {
    const std::size_t cue_words = std::min(delta, word_count - 1);
    count.cue = sub_repetitions(cue_words, cue_signal, params.step);
    count.reply = sub_repetitions(word_count - cue_words, reply_signal, params.step);
    return count;
  }
  const std::size_t last_start = (2 * pairs - 1) * delta;
  const std::size_t last_words = std::min(delta, word_count - last_start);
  count.cue = pairs * sub_repetitions(delta, cue_signal, params.step);
  count.reply = (pairs - 1) * sub_repetitions(delta, reply_signal, params.step) +
                sub_repetitions(last_words, reply_signal, params.step);
  return count;
}

DensityReport density_report(std::span<const MarkedDocument> docs) {
  DensityReport report;
  report.documents = docs.size();
  if (docs.empty()) return report;
  report.min_words = docs.front().original().word_count();
  double sum = 0.0;
  double sum_sq = 0.0;
  double repetitions = 0.0;
  for (const auto& md : docs) {
    const std::size_t words = md.original().word_count();
    report.min_words = std::min(report.min_words, words);
    report.max_words = std::max(report.max_words, words);
    sum += static_cast<double>(words);
    sum_sq += static_cast<double>(words) * static_cast<double>(words);
    if (words < 200) ++report.short_documents;
    repetitions += static_cast<double>(
        repetition_count(words, md.params(), md.watermark().cue_length(), md.watermark().size())
            .total());
  }
  const double n = static_cast<double>(docs.size());
  report.mean_words = sum / n;
  report.std_words =
      docs.size() > 1 ? std::sqrt(std::max(0.0, (sum_sq - sum * sum / n) / (n - 1))) : 0.0;
  report.mean_repetitions = repetitions / n;
  report.approx_per_32_words = report.mean_words / 32.0;
  return report;
}

}  // namespace ghostmark
