#pragma once

#include <chrono>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ghostmark/alphabet.hpp"
#include "ghostmark/embedder.hpp"
#include "ghostmark/error.hpp"
#include "ghostmark/invisible.hpp"
#include "ghostmark/oracle.hpp"
#include "ghostmark/watermark.hpp"

namespace ghostmark {

struct Challenge {
  std::string doc_id;
  std::size_t index = 0;  // 1-based pair number within the document
  std::string prompt;
  std::string watermark_id;
  std::vector<Letter> expected_reply;
};

// One challenge per cue/reply pair: the marked cue chunk, the whitespace that
// followed it, and the start of the reply chunk up to (not including) its
// first reply syllable, capped at o * (1 + step) elements. Throws
// ValidationError if a prompt would carry the reply itself.
std::vector<Challenge> build_challenges(const MarkedDocument& md, const Alphabet& alphabet);

struct RetryPolicy {
  std::size_t max_attempts = 3;
  std::chrono::milliseconds initial_backoff{200};
  double multiplier = 2.0;
};

struct VerifParams {
  std::size_t lambda = 1;  // generations per challenge
  GenerationSettings settings;
  RetryPolicy retry;
};

struct TranscriptEntry {
  std::string doc_id;
  std::string watermark_id;
  std::size_t challenge_index = 0;
  std::size_t attempt = 0;  // 1-based
  std::optional<std::uint64_t> seed;
  const std::string* prompt = nullptr;
  const std::string* output = nullptr;
  std::size_t invisible_length = 0;
  std::size_t invalid_bytes = 0;
  bool hit = false;
};

// Called once per generation; must be thread-safe when audits run in parallel.
using TranscriptSink = std::function<void(const TranscriptEntry&)>;

struct ChunkResult {
  std::string doc_id;
  std::size_t challenge_index = 0;
  std::size_t attempts = 0;
  bool hit = false;
  std::optional<std::size_t> first_hit_attempt;
  std::vector<std::size_t> raw_invisible_lengths;
};

// Calls the oracle, retrying retryable transport failures with exponential
// backoff. Auth and protocol errors propagate immediately.
std::string generate_with_retry(ChallengeOracle& oracle, std::string_view prompt,
                                const GenerationSettings& settings, const RetryPolicy& retry);

// Up to lambda generations, stopping at the first output whose invisible
// stream carries the expected reply. Each attempt uses seed
// derive_seed(settings.seed, attempt) when a base seed is set.
ChunkResult verif_chunk(ChallengeOracle& oracle, const Challenge& challenge,
                        const VerifParams& params, const Alphabet& alphabet,
                        const TranscriptSink& sink = {});

struct DocResult {
  std::string doc_id;
  std::size_t score = 0;
  std::vector<ChunkResult> chunks;
};

DocResult verif_doc(ChallengeOracle& oracle, const MarkedDocument& md,
                    const VerifParams& params, const Alphabet& alphabet,
                    const TranscriptSink& sink = {});

struct DocError {
  std::string doc_id;
  ErrorKind kind;
  std::string message;
};

struct CollectionResult {
  std::size_t score = 0;       // challenges answered with the reply
  std::size_t challenges = 0;  // challenges fully evaluated
  std::vector<DocResult> docs;
  std::vector<DocError> errors;

  bool complete() const noexcept { return errors.empty(); }
};

// Transport failures are recorded per document and never counted as misses.
// Auth failures abort the whole collection.
CollectionResult verif_collection(ChallengeOracle& oracle,
                                  std::span<const MarkedDocument> docs,
                                  const VerifParams& params, const Alphabet& alphabet,
                                  const TranscriptSink& sink = {});

}  // namespace ghostmark
