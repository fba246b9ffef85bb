#include "ghostmark/sim_oracle.hpp"

#include <algorithm>

#include "ghostmark/error.hpp"
#include "ghostmark/invisible.hpp"
#include "ghostmark/lexicon.hpp"

namespace ghostmark {

namespace {

void check_filler(const FillerConfig& filler) {
  if (!(filler.invisible_rate >= 0.0 && filler.invisible_rate <= 1.0)) {
    throw ValidationError("filler invisible rate must lie in [0, 1]");
  }
}

void check_probability(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("hit probability must lie in [0, 1]");
}

}  // namespace

Rng CallStreams::stream(std::string_view prompt, const GenerationSettings& settings) {
  if (settings.seed) {
    return Rng(derive_seed(derive_seed(seed_, *settings.seed), hash_bytes(prompt)));
  }
  return Rng(derive_seed(seed_ ^ 0xA5A5A5A5A5A5A5A5ULL, calls_.fetch_add(1)));
}

std::size_t write_filler(std::string& out, Rng& rng, const FillerConfig& config,
                         std::size_t tokens) {
  const auto words = lexicon();
  std::uniform_int_distribution<std::size_t> pick_word(0, words.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_letter(0, config.alphabet.size() - 1);
  std::bernoulli_distribution invisible(config.invisible_rate);
  bool need_space = !out.empty();
  for (std::size_t t = 0; t < tokens; ++t) {
    if (config.invisible_rate > 0.0 && invisible(rng)) {
      out.append(config.alphabet.encoded(static_cast<Letter>(pick_letter(rng))));
      continue;
    }
    if (need_space) out.push_back(' ');
    out.append(words[pick_word(rng)]);
    need_space = true;
  }
  return tokens;
}

NullOracle::NullOracle(Config config) : config_(std::move(config)), streams_(config_.seed) {
  check_filler(config_.filler);
}

std::string NullOracle::generate(std::string_view prompt, const GenerationSettings& settings) {
  Rng rng = streams_.stream(prompt, settings);
  std::string out;
  const std::size_t tokens = std::min(config_.filler.output_length, settings.max_new_tokens);
  out.reserve(tokens * 4);
  write_filler(out, rng, config_.filler, tokens);
  return out;
}

MemorizingOracle::MemorizingOracle(Config config)
    : config_(std::move(config)), streams_(config_.seed) {
  check_filler(config_.filler);
  check_probability(config_.hit_prob);
}

MemorizingOracle::MemorizingOracle(Config config, std::span<const MarkedDocument> trained_set)
    : MemorizingOracle(std::move(config)) {
  for (const MarkedDocument& md : trained_set) train(md.watermark());
}

void MemorizingOracle::train(const Watermark& w, std::optional<double> hit_prob) {
  const double p = hit_prob.value_or(config_.hit_prob);
  check_probability(p);
  const auto cue = w.cue_letters();
  const auto reply = w.reply_letters();
  for (const Pattern& existing : patterns_) {
    if (std::ranges::equal(existing.cue, cue) && std::ranges::equal(existing.reply, reply)) {
      return;
    }
  }
  patterns_.push_back({{cue.begin(), cue.end()}, {reply.begin(), reply.end()}, p});
}

std::string MemorizingOracle::generate(std::string_view prompt,
                                       const GenerationSettings& settings) {
  Rng rng = streams_.stream(prompt, settings);
  const std::size_t tokens = std::min(config_.filler.output_length, settings.max_new_tokens);

  const Pattern* matched = nullptr;
  if (!patterns_.empty()) {
    const Extraction stream = extract_invisible(prompt, config_.filler.alphabet);
    for (const Pattern& p : patterns_) {
      if (contains_run(stream.letters, p.cue)) {
        matched = &p;
        break;
      }
    }
  }
  bool emit = false;
  if (matched != nullptr && matched->hit_prob > 0.0) {
    emit = std::bernoulli_distribution(matched->hit_prob)(rng);
  }

  std::string out;
  out.reserve(tokens * 4 + 64);
  if (!emit) {
    write_filler(out, rng, config_.filler, tokens);
    return out;
  }
  const std::size_t before = std::uniform_int_distribution<std::size_t>(0, tokens)(rng);
  write_filler(out, rng, config_.filler, before);
  append_letters(out, matched->reply, config_.filler.alphabet);
  write_filler(out, rng, config_.filler, tokens - before);
  return out;
}

}  // namespace ghostmark
