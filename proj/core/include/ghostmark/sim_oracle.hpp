#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ghostmark/alphabet.hpp"
#include "ghostmark/embedder.hpp"
#include "ghostmark/oracle.hpp"
#include "ghostmark/rng.hpp"
#include "ghostmark/watermark.hpp"

namespace ghostmark {

// Shared per-call RNG derivation for the simulated oracles: seeded calls
// depend on (oracle seed, settings seed, prompt); unseeded calls draw from a
// per-oracle call counter.
class CallStreams {
 public:
  explicit CallStreams(std::uint64_t seed) : seed_(seed) {}
  Rng stream(std::string_view prompt, const GenerationSettings& settings);

 private:
  std::uint64_t seed_;
  std::atomic<std::uint64_t> calls_{0};
};

struct FillerConfig {
  Alphabet alphabet = Alphabet::standard();
  double invisible_rate = 0.0;  // chance a token is a random alphabet character
  std::size_t output_length = 200;
};

// Lexicon words joined by spaces, with random alphabet characters mixed in at
// `invisible_rate`. Returns the number of tokens produced.
std::size_t write_filler(std::string& out, Rng& rng, const FillerConfig& config,
                         std::size_t tokens);

// Never trained on anything: filler text only.
class NullOracle : public ChallengeOracle {
 public:
  struct Config {
    FillerConfig filler;
    std::uint64_t seed = 0;
  };

  explicit NullOracle(Config config);
  std::string generate(std::string_view prompt, const GenerationSettings& settings) override;

 private:
  Config config_;
  CallStreams streams_;
};

// Emits the reply of a trained watermark with probability p whenever the
// prompt's invisible stream contains that watermark's full cue.
class MemorizingOracle : public ChallengeOracle {
 public:
  struct Config {
    FillerConfig filler;
    double hit_prob = 1.0;
    std::uint64_t seed = 0;
  };

  struct Pattern {
    std::vector<Letter> cue;
    std::vector<Letter> reply;
    double hit_prob;
  };

  explicit MemorizingOracle(Config config);
  MemorizingOracle(Config config, std::span<const MarkedDocument> trained_set);

  // Not thread-safe with respect to generate(); train before serving.
  void train(const Watermark& w, std::optional<double> hit_prob = std::nullopt);
  std::size_t pattern_count() const noexcept { return patterns_.size(); }

  std::string generate(std::string_view prompt, const GenerationSettings& settings) override;

 private:
  Config config_;
  CallStreams streams_;
  std::vector<Pattern> patterns_;
};

}  // namespace ghostmark
