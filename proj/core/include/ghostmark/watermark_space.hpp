#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "ghostmark/alphabet.hpp"
#include "ghostmark/rng.hpp"
#include "ghostmark/watermark.hpp"

namespace ghostmark {

using BigInt = boost::multiprecision::cpp_int;

enum class PairCheck {
  kOk,
  kViolatesC1,  // distinct watermarks sharing a cue or a reply
  kViolatesC2,  // a cue inside a reply or a reply inside a cue
};

const char* to_string(PairCheck check);

// Checks the uniqueness constraints on flattened letter sequences. A
// watermark paired with itself is exempt from c1 but not from c2 (its own
// reply must not occur in its own cue). Throws ValidationError when m, n or j
// differ.
PairCheck check_pair(const Watermark& a, const Watermark& b);

// floor(|A|^(m*j) / 2) for equal-length cue and reply.
BigInt capacity_symmetric(std::size_t alphabet_size, std::size_t m, std::size_t j);

// Number of alignments of a reply inside a cue: m*j - m*(n-j) + 1.
std::size_t reply_alignments(std::size_t m, std::size_t j, std::size_t n);

// Nearest integer to |A|^(m*j) / (1 + c * |A|^(m*j - m*(n-j))), the point
// where admissible cues and the cues left over by their replies balance. Each
// reply sits in c alignments of a cue, leaving m*j - m*(n-j) free letters. Requires
// j > n - j; throws ValidationError otherwise.
BigInt capacity_asymmetric(std::size_t alphabet_size, std::size_t m, std::size_t j,
                           std::size_t n);

// Invisible stream a challenge for `w` carries with overlap `o`: the cue
// prefix s_1..s_{j-o} repeated `cycles` times, then s_{j-o+1}..s_j.
std::vector<Letter> challenge_stream(const Watermark& w, std::size_t overlap,
                                     std::size_t cycles);

// True if no challenge built from `w`, for any overlap 1 <= o < j, can carry
// the reply as a contiguous run.
bool challenge_safe(const Watermark& w);

// SHA-256 (hex) of canonical_candidate_json.
std::string commit(const Alphabet& alphabet, std::span<const Watermark> watermarks,
                   std::size_t chosen_index);

// {"params":{...},"watermarks":[...],"chosen_index":k}, keys in that order.
std::string canonical_candidate_json(const Alphabet& alphabet,
                                     std::span<const Watermark> watermarks,
                                     std::size_t chosen_index);

struct CandidateSet {
  Alphabet alphabet = Alphabet::standard();
  WatermarkParams params;
  std::vector<Watermark> watermarks;
  std::size_t chosen_index = 1;  // 1-based
  std::string commitment;
  std::string issued_at;

  std::size_t size() const noexcept { return watermarks.size(); }
  const Watermark& chosen() const { return watermarks.at(chosen_index - 1); }

  // Recomputes the digest over the revealed contents.
  std::string recompute_commitment() const {
    return commit(alphabet, watermarks, chosen_index);
  }
  bool commitment_matches() const { return recompute_commitment() == commitment; }
};

// Trusted issuer. Tracks every watermark ever handed out (W_com) and samples
// fresh candidate sets by rejection. Issuance takes an exclusive lock; all
// queries take a shared one.
class Registry {
 public:
  Registry(Alphabet alphabet, WatermarkParams params,
           std::optional<std::uint64_t> seed = std::nullopt);

  // Opens (or creates) an append-only JSONL journal. Existing entries are
  // replayed and re-validated; a journal whose entries break the constraints
  // or whose commitments do not recompute is rejected.
  static Registry open(const std::filesystem::path& journal, Alphabet alphabet,
                       WatermarkParams params,
                       std::optional<std::uint64_t> seed = std::nullopt);

  // Samples K fresh watermarks, records them, draws the chosen index
  // uniformly and commits. Throws CapacityError after 1000*K rejections.
  CandidateSet issue(std::size_t k);

  // Whether `w` could be issued next (constraints against W_com and itself).
  bool admissible(const Watermark& w) const;

  std::size_t issued_count() const;
  std::vector<Watermark> issued() const;
  std::vector<CandidateSet> history() const;
  std::optional<CandidateSet> find_by_commitment(const std::string& digest) const;

  const Alphabet& alphabet() const noexcept { return alphabet_; }
  const WatermarkParams& params() const noexcept { return params_; }

  static constexpr std::size_t kAttemptsPerWatermark = 1000;

 private:
  using Key = std::string;

  Registry(const std::filesystem::path& journal, Alphabet alphabet,
           WatermarkParams params, std::optional<std::uint64_t> seed);
  void replay_journal();

  Key key(std::span<const Letter> letters) const;
  bool admissible_locked(const Watermark& w) const;
  void record_locked(const Watermark& w);
  void append_journal(const CandidateSet& set) const;

  Alphabet alphabet_;
  WatermarkParams params_;
  Rng rng_;
  std::optional<std::filesystem::path> journal_;

  mutable std::shared_mutex mutex_;
  std::vector<Watermark> issued_;
  std::vector<CandidateSet> history_;
  std::unordered_set<Key> cues_;
  std::unordered_set<Key> replies_;
  std::unordered_set<Key> cue_windows_;    // reply-length windows of issued cues
  std::unordered_set<Key> reply_windows_;  // cue-length windows of issued replies
};

}  // namespace ghostmark
