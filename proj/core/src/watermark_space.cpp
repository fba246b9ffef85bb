#include "ghostmark/watermark_space.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <mutex>

#include <openssl/evp.h>

#include "ghostmark/error.hpp"
#include "ghostmark/serialization.hpp"

namespace ghostmark {
namespace {

BigInt power(std::size_t base, std::size_t exponent) {
  BigInt result = 1;
  for (std::size_t i = 0; i < exponent; ++i) result *= base;
  return result;
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorKind::kIo, "SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(length * 2);
  for (unsigned int i = 0; i < length; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0x0F]);
  }
  return out;
}

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void require_same_shape(const Watermark& a, const Watermark& b) {
  if (a.syllable_length() != b.syllable_length() || a.size() != b.size() ||
      a.cue_length() != b.cue_length()) {
    throw ValidationError("check_pair: watermarks have different (m, n, j)");
  }
}

}  // namespace

const char* to_string(PairCheck check) {
  switch (check) {
    case PairCheck::kOk: return "ok";
    case PairCheck::kViolatesC1: return "violates_c1";
    case PairCheck::kViolatesC2: return "violates_c2";
  }
  return "unknown";
}

PairCheck check_pair(const Watermark& a, const Watermark& b) {
  require_same_shape(a, b);
  const bool same = a == b;
  if (!same && (std::ranges::equal(a.cue_letters(), b.cue_letters()) ||
                std::ranges::equal(a.reply_letters(), b.reply_letters()))) {
    return PairCheck::kViolatesC1;
  }
  if (contains_run(a.reply_letters(), b.cue_letters()) ||
      contains_run(b.reply_letters(), a.cue_letters()) ||
      contains_run(a.cue_letters(), b.reply_letters()) ||
      contains_run(b.cue_letters(), a.reply_letters())) {
    return PairCheck::kViolatesC2;
  }
  return PairCheck::kOk;
}

BigInt capacity_symmetric(std::size_t alphabet_size, std::size_t m, std::size_t j) {
  return power(alphabet_size, m * j) / 2;
}

std::size_t reply_alignments(std::size_t m, std::size_t j, std::size_t n) {
  if (j <= n - j) {
    throw ValidationError("reply_alignments requires a cue longer than the reply");
  }
  return m * j - m * (n - j) + 1;
}

BigInt capacity_asymmetric(std::size_t alphabet_size, std::size_t m, std::size_t j,
                           std::size_t n) {
  if (j >= n || m == 0 || alphabet_size < 2) {
    throw ValidationError("capacity_asymmetric: invalid parameters");
  }
  const std::size_t c = reply_alignments(m, j, n);
  const BigInt cues = power(alphabet_size, m * j);
  const BigInt denominator = 1 + BigInt(c) * power(alphabet_size, m * j - m * (n - j));
  BigInt quotient = cues / denominator;
  const BigInt remainder = cues % denominator;
  if (2 * remainder >= denominator) quotient += 1;
  return quotient;
}

std::vector<Letter> challenge_stream(const Watermark& w, std::size_t overlap,
                                     std::size_t cycles) {
  const auto cue = w.cue();
  const auto prefix = flatten(cue.first(cue.size() - overlap));
  const auto tail = flatten(cue.subspan(cue.size() - overlap));
  std::vector<Letter> out;
  out.reserve(prefix.size() * cycles + tail.size());
  for (std::size_t i = 0; i < cycles; ++i) out.insert(out.end(), prefix.begin(), prefix.end());
  out.insert(out.end(), tail.begin(), tail.end());
  return out;
}

bool challenge_safe(const Watermark& w) {
  const auto reply = w.reply_letters();
  for (std::size_t o = 1; o < w.cue_length(); ++o) {
    const std::size_t period = (w.cue_length() - o) * w.syllable_length();
    const std::size_t cycles = (reply.size() + period - 1) / period + 1;
    if (contains_run(challenge_stream(w, o, cycles), reply)) return false;
  }
  return true;
}

std::string canonical_candidate_json(const Alphabet& alphabet,
                                     std::span<const Watermark> watermarks,
                                     std::size_t chosen_index) {
  if (watermarks.empty() || chosen_index < 1 || chosen_index > watermarks.size()) {
    throw ValidationError("commit: chosen index must lie in [1, K]");
  }
  const Watermark& first = watermarks.front();
  WatermarkParams params{alphabet.size(), first.syllable_length(), first.size(),
                         first.cue_length()};
  nlohmann::ordered_json j;
  j["params"] = params_to_json(alphabet, params);
  auto list = nlohmann::ordered_json::array();
  for (const auto& w : watermarks) list.push_back(w.canonical());
  j["watermarks"] = std::move(list);
  j["chosen_index"] = chosen_index;
  return j.dump();
}

std::string commit(const Alphabet& alphabet, std::span<const Watermark> watermarks,
                   std::size_t chosen_index) {
  return sha256_hex(canonical_candidate_json(alphabet, watermarks, chosen_index));
}

Registry::Registry(Alphabet alphabet, WatermarkParams params,
                   std::optional<std::uint64_t> seed)
    : alphabet_(std::move(alphabet)), params_(params),
      rng_(seed ? *seed : entropy_seed()) {
  params_.validate();
  if (params_.alphabet_size != alphabet_.size()) {
    throw ValidationError("registry: params alphabet size " +
                          std::to_string(params_.alphabet_size) +
                          " does not match the alphabet (" +
                          std::to_string(alphabet_.size()) + ")");
  }
}

Registry::Registry(const std::filesystem::path& journal, Alphabet alphabet,
                   WatermarkParams params, std::optional<std::uint64_t> seed)
    : Registry(std::move(alphabet), params, seed) {
  journal_ = journal;
  replay_journal();
}

Registry Registry::open(const std::filesystem::path& journal, Alphabet alphabet,
                        WatermarkParams params, std::optional<std::uint64_t> seed) {
  return Registry(journal, std::move(alphabet), params, seed);
}

void Registry::replay_journal() {
  std::ifstream in(*journal_);
  if (!in) return;  // created on first issuance
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto where = journal_->string() + ":" + std::to_string(line_no);
    CandidateSet set;
    try {
      const auto entry = nlohmann::json::parse(line);
      set = candidate_set_from_json(require_field<nlohmann::json>(entry, "candidate_set"));
      set.issued_at = optional_field<std::string>(entry, "issued_at", set.issued_at);
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(where + ": unreadable journal entry: " + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError(where + ": " + e.what());
    }
    if (!(set.alphabet == alphabet_) || !(set.params == params_)) {
      throw ValidationError(where + ": journal parameters differ from the registry's");
    }
    if (!set.watermarks.empty() && !set.commitment_matches()) {
      throw ValidationError(where + ": commitment does not match the recorded set");
    }
    for (std::size_t i = 0; i < set.watermarks.size(); ++i) {
      const auto& w = set.watermarks[i];
      bool ok = admissible_locked(w);
      for (std::size_t k = 0; ok && k < i; ++k) {
        ok = check_pair(w, set.watermarks[k]) == PairCheck::kOk;
      }
      if (!ok) {
        throw ValidationError(where + ": watermark " + w.canonical() +
                              " violates the uniqueness constraints");
      }
    }
    for (const auto& w : set.watermarks) record_locked(w);
    history_.push_back(std::move(set));
  }
}

Registry::Key Registry::key(std::span<const Letter> letters) const {
  return Key(letters.begin(), letters.end());
}

bool Registry::admissible(const Watermark& w) const {
  std::shared_lock lock(mutex_);
  return admissible_locked(w);
}

bool Registry::admissible_locked(const Watermark& w) const {
  if (!w.fits(params_)) return false;
  if (check_pair(w, w) != PairCheck::kOk || !challenge_safe(w)) return false;

  const auto cue = w.cue_letters();
  const auto reply = w.reply_letters();
  if (cues_.contains(key(cue)) || replies_.contains(key(reply))) return false;

  if (cue.size() >= reply.size()) {
    // reply of w inside an issued cue; an issued reply inside the cue of w
    if (cue_windows_.contains(key(reply))) return false;
    for (std::size_t i = 0; i + reply.size() <= cue.size(); ++i) {
      if (replies_.contains(key(cue.subspan(i, reply.size())))) return false;
    }
  }
  if (reply.size() >= cue.size()) {
    if (reply_windows_.contains(key(cue))) return false;
    for (std::size_t i = 0; i + cue.size() <= reply.size(); ++i) {
      if (cues_.contains(key(reply.subspan(i, cue.size())))) return false;
    }
  }
  return true;
}

void Registry::record_locked(const Watermark& w) {
  const auto cue = w.cue_letters();
  const auto reply = w.reply_letters();
  cues_.insert(key(cue));
  replies_.insert(key(reply));
  for (std::size_t i = 0; i + reply.size() <= cue.size(); ++i) {
    cue_windows_.insert(key(cue.subspan(i, reply.size())));
  }
  for (std::size_t i = 0; i + cue.size() <= reply.size(); ++i) {
    reply_windows_.insert(key(reply.subspan(i, cue.size())));
  }
  issued_.push_back(w);
}

CandidateSet Registry::issue(std::size_t k) {
  std::unique_lock lock(mutex_);
  CandidateSet set{alphabet_, params_, {}, 0, {}, {}};
  if (k == 0) return set;

  const std::size_t budget = kAttemptsPerWatermark * k;
  std::uniform_int_distribution<unsigned> letter(0, static_cast<unsigned>(params_.alphabet_size - 1));
  std::size_t attempts = 0;
  while (set.watermarks.size() < k) {
    if (attempts >= budget) {
      throw CapacityError("registry exhausted: " + std::to_string(set.watermarks.size()) +
                              " of " + std::to_string(k) + " watermarks found after " +
                              std::to_string(attempts) + " attempts",
                          attempts);
    }
    ++attempts;
    std::vector<Syllable> syllables;
    syllables.reserve(params_.total_syllables);
    for (std::size_t s = 0; s < params_.total_syllables; ++s) {
      std::vector<Letter> letters(params_.syllable_length);
      for (auto& l : letters) l = static_cast<Letter>(letter(rng_));
      syllables.emplace_back(std::move(letters));
    }
    Watermark candidate(std::move(syllables), params_.cue_syllables);
    if (!admissible_locked(candidate)) continue;
    const bool clashes = std::ranges::any_of(set.watermarks, [&](const Watermark& other) {
      return candidate == other || check_pair(candidate, other) != PairCheck::kOk;
    });
    if (clashes) continue;
    set.watermarks.push_back(std::move(candidate));
  }

  std::uniform_int_distribution<std::size_t> pick(1, k);
  set.chosen_index = pick(rng_);
  set.commitment = set.recompute_commitment();
  set.issued_at = utc_now();

  append_journal(set);
  for (const auto& w : set.watermarks) record_locked(w);
  history_.push_back(set);
  return set;
}

void Registry::append_journal(const CandidateSet& set) const {
  if (!journal_) return;
  std::ofstream out(*journal_, std::ios::app);
  if (!out) throw IoError("cannot open registry journal " + journal_->string());
  nlohmann::ordered_json entry;
  entry["issued_at"] = set.issued_at;
  entry["candidate_set"] = candidate_set_to_json(set);
  out << entry.dump() << '\n';
  out.flush();
  if (!out) throw IoError("cannot write registry journal " + journal_->string());
}

std::size_t Registry::issued_count() const {
  std::shared_lock lock(mutex_);
  return issued_.size();
}

std::vector<Watermark> Registry::issued() const {
  std::shared_lock lock(mutex_);
  return issued_;
}

std::vector<CandidateSet> Registry::history() const {
  std::shared_lock lock(mutex_);
  return history_;
}

std::optional<CandidateSet> Registry::find_by_commitment(const std::string& digest) const {
  std::shared_lock lock(mutex_);
  for (const auto& set : history_) {
    if (set.commitment == digest) return set;
  }
  return std::nullopt;
}

}  // namespace ghostmark
