#include "ghostmark/decision.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

#include "ghostmark/error.hpp"
#include "ghostmark/rng.hpp"

namespace ghostmark {

std::string Rational::str() const {
  if (denominator == 1) return std::to_string(numerator);
  return std::to_string(numerator) + "/" + std::to_string(denominator);
}

Rational fpr_bound(std::size_t k, std::size_t K) {
  if (k < 1 || k > K) throw ValidationError("k must satisfy 1 <= k <= K");
  const std::uint64_t g = std::gcd<std::uint64_t>(k, K);
  return {k / g, K / g};
}

RankingOutcome rank_scores(std::size_t target_score,
                           std::span<const std::size_t> counterfactual_scores, std::size_t k) {
  RankingOutcome out;
  out.target_score = target_score;
  out.counterfactual_scores.assign(counterfactual_scores.begin(), counterfactual_scores.end());
  out.K = counterfactual_scores.size() + 1;
  out.k = k;
  out.fpr_bound = fpr_bound(k, out.K);
  out.rank = 1 + static_cast<std::size_t>(
                     std::count_if(counterfactual_scores.begin(), counterfactual_scores.end(),
                                   [&](std::size_t s) { return s >= target_score; }));
  out.decision = out.rank <= k;
  return out;
}

void verify_commitment(const CandidateSet& set, const std::optional<std::string>& expected) {
  const std::string& want = expected ? *expected : set.commitment;
  if (want.empty()) throw CommitmentError("candidate set carries no commitment");
  const std::string got = set.recompute_commitment();
  if (got != want) {
    throw CommitmentError("commitment mismatch: recorded " + want + ", revealed set hashes to " +
                          got);
  }
}

bool AuditResult::complete() const {
  return std::all_of(passes.begin(), passes.end(),
                     [](const CollectionResult& r) { return r.complete(); });
}

AuditResult decide(ChallengeOracle& oracle,
                   std::span<const std::shared_ptr<const Document>> docs,
                   const CandidateSet& set, const Alphabet& alphabet,
                   const DecideOptions& options) {
  verify_commitment(set, options.expected_commitment);
  const std::size_t K = set.size();
  if (K == 0) throw ValidationError("candidate set is empty");
  if (set.chosen_index < 1 || set.chosen_index > K) {
    throw ValidationError("chosen_index is outside [1, K]");
  }
  if (options.k < 1 || options.k > K) throw ValidationError("k must satisfy 1 <= k <= K");
  if (!(alphabet == set.alphabet)) throw ValidationError("alphabet differs from the candidate set");

  AuditResult result;
  result.commitment = set.commitment;
  result.sampled.resize(docs.size());
  std::iota(result.sampled.begin(), result.sampled.end(), 0);
  if (options.sample_size && *options.sample_size < docs.size()) {
    Rng rng(options.sample_seed);
    std::shuffle(result.sampled.begin(), result.sampled.end(), rng);
    result.sampled.resize(*options.sample_size);
    std::sort(result.sampled.begin(), result.sampled.end());
  }

  result.passes.resize(K);
  auto score = [&](std::size_t i) {
    std::vector<MarkedDocument> marked;
    marked.reserve(result.sampled.size());
    for (std::size_t d : result.sampled) marked.push_back(mark(docs[d], set.watermarks[i], options.embed));
    result.passes[i] = verif_collection(oracle, marked, options.verif, alphabet, options.sink);
  };

  const std::size_t workers = std::clamp<std::size_t>(options.parallel, 1, K);
  if (workers == 1) {
    for (std::size_t i = 0; i < K; ++i) score(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < workers; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < K; i = next++) {
          try {
            score(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next = K;
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  }

  std::vector<std::size_t> counterfactual;
  counterfactual.reserve(K - 1);
  for (std::size_t i = 0; i < K; ++i) {
    if (i + 1 != set.chosen_index) counterfactual.push_back(result.passes[i].score);
  }
  result.outcome =
      rank_scores(result.passes[set.chosen_index - 1].score, counterfactual, options.k);
  return result;
}

double p_fn(double p, std::size_t lambda, std::size_t docs) {
  if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("p must lie in [0, 1]");
  if (lambda < 1) throw ValidationError("lambda must be at least 1");
  const double exponent = static_cast<double>(lambda) * static_cast<double>(docs);
  if (exponent == 0.0) return 1.0;
  if (p == 1.0) return 0.0;
  return std::exp(exponent * std::log1p(-p));
}

double p_fn_log10(double p, std::size_t lambda, std::size_t docs) {
  if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("p must lie in [0, 1]");
  if (lambda < 1) throw ValidationError("lambda must be at least 1");
  const double exponent = static_cast<double>(lambda) * static_cast<double>(docs);
  if (exponent == 0.0) return 0.0;
  if (p == 1.0) return -HUGE_VAL;
  return exponent * std::log1p(-p) / std::log(10.0);
}

PEstimate estimate_p(std::span<const ChunkResult> results) {
  PEstimate out;
  for (const ChunkResult& r : results) {
    if (r.attempts != 1) {
      throw ValidationError("estimate_p needs single-attempt results (lambda = 1)");
    }
    ++out.trials;
    if (r.hit) ++out.hits;
  }
  if (out.trials == 0) throw ValidationError("estimate_p needs at least one result");
  out.p_hat = static_cast<double>(out.hits) / static_cast<double>(out.trials);
  out.ci = stats::clopper_pearson(out.hits, out.trials, 0.95);
  return out;
}

}  // namespace ghostmark
