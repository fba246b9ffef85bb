#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ghostmark/document.hpp"
#include "ghostmark/embedder.hpp"
#include "ghostmark/oracle.hpp"
#include "ghostmark/stats.hpp"
#include "ghostmark/verifier.hpp"
#include "ghostmark/watermark_space.hpp"

namespace ghostmark {

struct Rational {
  std::uint64_t numerator = 0;
  std::uint64_t denominator = 1;

  double value() const noexcept {
    return static_cast<double>(numerator) / static_cast<double>(denominator);
  }
  std::string str() const;
  friend bool operator==(const Rational&, const Rational&) = default;
};

// k/K in lowest terms. Requires 1 <= k <= K.
Rational fpr_bound(std::size_t k, std::size_t K);

struct RankingOutcome {
  std::size_t target_score = 0;
  std::vector<std::size_t> counterfactual_scores;
  std::size_t rank = 1;  // 1 + counterfactuals scoring >= target
  std::size_t k = 1;
  std::size_t K = 1;
  bool decision = false;  // rank <= k
  Rational fpr_bound;
};

RankingOutcome rank_scores(std::size_t target_score,
                           std::span<const std::size_t> counterfactual_scores, std::size_t k);

// Throws CommitmentError unless the set's contents hash to `expected`
// (defaults to the set's own commitment field).
void verify_commitment(const CandidateSet& set,
                       const std::optional<std::string>& expected = std::nullopt);

struct DecideOptions {
  std::size_t k = 1;
  VerifParams verif;
  EmbedParams embed;
  // Score only this many documents, drawn once and shared by all K passes.
  std::optional<std::size_t> sample_size;
  std::uint64_t sample_seed = 0;
  std::size_t parallel = 1;
  std::optional<std::string> expected_commitment;
  TranscriptSink sink;
};

struct AuditResult {
  RankingOutcome outcome;
  std::string commitment;
  std::vector<CollectionResult> passes;  // passes[i] scores set.watermarks[i]
  std::vector<std::size_t> sampled;      // indices into the input collection

  bool complete() const;
};

// Verifies the commitment, re-marks the same documents with every member of
// the set, scores each pass with identical generation settings and ranks the
// chosen watermark against the others.
AuditResult decide(ChallengeOracle& oracle,
                   std::span<const std::shared_ptr<const Document>> docs,
                   const CandidateSet& set, const Alphabet& alphabet,
                   const DecideOptions& options);

// (1 - p)^(lambda * X), evaluated in log space.
double p_fn(double p, std::size_t lambda, std::size_t docs);
double p_fn_log10(double p, std::size_t lambda, std::size_t docs);

struct PEstimate {
  std::size_t hits = 0;
  std::size_t trials = 0;
  double p_hat = 0.0;
  stats::Interval ci;  // 95% Clopper-Pearson
};

// Requires single-attempt results.
PEstimate estimate_p(std::span<const ChunkResult> results);

}  // namespace ghostmark
