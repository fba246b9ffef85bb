#include <fstream>
#include <map>
#include <random>
#include <set>
#include <thread>

#include <gtest/gtest.h>

#include "ghostmark/error.hpp"
#include "ghostmark/stats.hpp"
#include "ghostmark/watermark_space.hpp"
#include "test_support.hpp"

namespace ghostmark {
namespace {

using testing::naive_pair_ok;

Watermark wm(const char* text) { return Watermark::parse(text); }

// Every watermark of a small space, in lexicographic letter order.
std::vector<Watermark> enumerate_space(std::size_t a, std::size_t m, std::size_t n,
                                       std::size_t j) {
  std::vector<Watermark> out;
  const std::size_t letters = m * n;
  std::size_t total = 1;
  for (std::size_t i = 0; i < letters; ++i) total *= a;
  for (std::size_t code = 0; code < total; ++code) {
    std::size_t c = code;
    std::vector<Syllable> syllables;
    for (std::size_t s = 0; s < n; ++s) {
      std::vector<Letter> l(m);
      for (auto& x : l) {
        x = static_cast<Letter>(c % a);
        c /= a;
      }
      syllables.emplace_back(std::move(l));
    }
    out.emplace_back(std::move(syllables), j);
  }
  return out;
}

// Challenge stream for overlap o: cue prefix repeated, then the overlap tail.
bool naive_challenge_safe(const Watermark& w) {
  const auto cue = testing::cue_of(w);
  const auto reply = testing::reply_of(w);
  const std::size_t m = w.syllable_length();
  for (std::size_t o = 1; o < w.cue_length(); ++o) {
    const std::size_t period = (w.cue_length() - o) * m;
    std::vector<Letter> stream;
    for (std::size_t r = 0; r < reply.size() + 2; ++r) {
      stream.insert(stream.end(), cue.begin(), cue.begin() + static_cast<long>(period));
    }
    stream.insert(stream.end(), cue.begin() + static_cast<long>(period), cue.end());
    if (testing::naive_contains(stream, reply)) return false;
  }
  return true;
}

TEST(CheckPair, KnownCases) {
  const auto a = wm("0-1-2;j=2");
  EXPECT_EQ(check_pair(a, a), PairCheck::kOk);
  EXPECT_EQ(check_pair(a, wm("0-1-3;j=2")), PairCheck::kViolatesC1);  // shared cue
  EXPECT_EQ(check_pair(a, wm("3-3-2;j=2")), PairCheck::kViolatesC1);  // shared reply
  EXPECT_EQ(check_pair(a, wm("3-2-1;j=2")), PairCheck::kViolatesC2);  // reply of a in cue of b
  EXPECT_EQ(check_pair(wm("0-0-0;j=2"), wm("0-0-0;j=2")), PairCheck::kViolatesC2);
  EXPECT_EQ(check_pair(a, wm("3-3-3;j=2")), PairCheck::kOk);
  EXPECT_THROW(check_pair(a, wm("0-1-2-3;j=2")), ValidationError);
}

TEST(CheckPair, AgreesWithDirectDefinitionOnRandomPairs) {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 50000; ++i) {
    const std::size_t n = 2 + rng() % 4;
    const std::size_t j = 1 + rng() % (n - 1);
    const auto a = testing::random_watermark(rng, 2, 1 + rng() % 2, n, j);
    const auto b = i % 5 == 0 ? a : testing::random_watermark(rng, 2, a.syllable_length(), n, j);
    EXPECT_EQ(check_pair(a, b) == PairCheck::kOk, naive_pair_ok(a, b)) << a.canonical() << " "
                                                                        << b.canonical();
  }
}

TEST(Capacity, Symmetric) {
  EXPECT_EQ(capacity_symmetric(4, 4, 4), BigInt(2147483648ULL));
  EXPECT_EQ(capacity_symmetric(2, 1, 1), BigInt(1));
  EXPECT_EQ(capacity_symmetric(4, 1, 1), BigInt(2));
}

TEST(Capacity, AsymmetricDefaultSpace) {
  EXPECT_EQ(reply_alignments(4, 5, 8), 9u);
  const BigInt c = capacity_asymmetric(4, 4, 5, 8);
  EXPECT_GE(c, BigInt(1864131));
  EXPECT_LE(c, BigInt(1864133));
  // Direct evaluation with doubles.
  const double x = std::pow(4.0, 20) / (1.0 + 9.0 * std::pow(4.0, 8));
  EXPECT_NEAR(static_cast<double>(c), x, 1.0);
  EXPECT_THROW(capacity_asymmetric(4, 4, 4, 8), ValidationError);
}

TEST(Capacity, TinySpaceMatchesBruteForce) {
  const auto space = enumerate_space(2, 1, 3, 2);
  ASSERT_EQ(space.size(), 8u);
  std::size_t best = 0;
  for (std::size_t mask = 1; mask < (1u << space.size()); ++mask) {
    std::vector<const Watermark*> members;
    for (std::size_t i = 0; i < space.size(); ++i) {
      if (mask & (1u << i)) members.push_back(&space[i]);
    }
    bool ok = true;
    for (std::size_t x = 0; x < members.size() && ok; ++x) {
      for (std::size_t y = x; y < members.size() && ok; ++y) {
        ok = naive_pair_ok(*members[x], *members[y]);
      }
    }
    if (ok) best = std::max(best, members.size());
  }
  EXPECT_EQ(best, 1u);
  EXPECT_EQ(capacity_asymmetric(2, 1, 2, 3), BigInt(best));
}

TEST(ChallengeSafe, AgreesWithDirectConstruction) {
  for (const auto& w : enumerate_space(2, 1, 5, 3)) {
    EXPECT_EQ(challenge_safe(w), naive_challenge_safe(w)) << w.canonical();
  }
  std::mt19937_64 rng(23);
  for (int i = 0; i < 2000; ++i) {
    const auto w = testing::random_watermark(rng, 2, 2, 6, 4);
    EXPECT_EQ(challenge_safe(w), naive_challenge_safe(w)) << w.canonical();
  }
}

TEST(Commitment, DeterministicAndSensitive) {
  const Alphabet a = Alphabet::standard();
  const std::vector<Watermark> ws{wm("0-1-2;j=2"), wm("3-3-3;j=2")};
  const auto c1 = commit(a, ws, 1);
  EXPECT_EQ(c1, commit(a, ws, 1));
  EXPECT_EQ(c1.size(), 64u);
  EXPECT_NE(c1, commit(a, ws, 2));
  const std::vector<Watermark> swapped{ws[1], ws[0]};
  EXPECT_NE(c1, commit(a, swapped, 1));
  EXPECT_THROW(commit(a, ws, 0), ValidationError);
  EXPECT_THROW(commit(a, ws, 3), ValidationError);
}

TEST(Registry, IssuedSetsAreMutuallyAdmissible) {
  Registry reg(Alphabet::standard(), WatermarkParams{}, 99);
  std::vector<Watermark> all;
  for (int round = 0; round < 3; ++round) {
    const CandidateSet set = reg.issue(40);
    ASSERT_EQ(set.size(), 40u);
    EXPECT_GE(set.chosen_index, 1u);
    EXPECT_LE(set.chosen_index, 40u);
    EXPECT_TRUE(set.commitment_matches());
    all.insert(all.end(), set.watermarks.begin(), set.watermarks.end());
  }
  EXPECT_EQ(reg.issued_count(), 120u);
  for (std::size_t x = 0; x < all.size(); ++x) {
    for (std::size_t y = x; y < all.size(); ++y) {
      ASSERT_TRUE(naive_pair_ok(all[x], all[y])) << all[x].canonical() << " " << all[y].canonical();
    }
  }
  for (const auto& w : all) EXPECT_FALSE(reg.admissible(w));
}

TEST(Registry, IssueZeroIsEmpty) {
  Registry reg(Alphabet::standard(), WatermarkParams{}, 1);
  EXPECT_TRUE(reg.issue(0).watermarks.empty());
  EXPECT_EQ(reg.issued_count(), 0u);
}

TEST(Registry, UniformOverAdmissibleSpace) {
  const WatermarkParams params{2, 1, 4, 2};
  const Alphabet alphabet({0x200B, 0x200C});
  std::map<std::string, std::size_t> expected_support;
  for (const auto& w : enumerate_space(2, 1, 4, 2)) {
    if (naive_pair_ok(w, w) && naive_challenge_safe(w)) expected_support[w.canonical()] = 0;
  }
  ASSERT_GE(expected_support.size(), 2u);
  constexpr std::size_t kDraws = 10000;
  for (std::size_t i = 0; i < kDraws; ++i) {
    Registry reg(alphabet, params, 1000 + i);
    const auto set = reg.issue(1);
    const auto it = expected_support.find(set.watermarks[0].canonical());
    ASSERT_NE(it, expected_support.end()) << set.watermarks[0].canonical();
    ++it->second;
  }
  const double expected = static_cast<double>(kDraws) / static_cast<double>(expected_support.size());
  double chi2 = 0.0;
  for (const auto& [key, count] : expected_support) {
    const double d = static_cast<double>(count) - expected;
    chi2 += d * d / expected;
  }
  const double p = stats::chi_square_sf(chi2, static_cast<double>(expected_support.size() - 1));
  EXPECT_GT(p, 0.001) << "chi2=" << chi2;
}

TEST(Registry, CapacityErrorWhenExhausted) {
  Registry reg(Alphabet({0x200B, 0x200C}), WatermarkParams{2, 1, 3, 2}, 4);
  EXPECT_EQ(reg.issue(1).size(), 1u);
  try {
    reg.issue(1);
    FAIL() << "expected CapacityError";
  } catch (const CapacityError& e) {
    EXPECT_EQ(e.attempts(), Registry::kAttemptsPerWatermark);
  }
}

TEST(Registry, RejectsAlphabetSizeMismatch) {
  EXPECT_THROW(Registry(Alphabet::standard(), WatermarkParams{2, 4, 8, 5}), ValidationError);
}

TEST(Registry, JournalReplayAndTamperDetection) {
  const auto dir = testing::temp_dir("journal");
  const auto journal = dir / "registry.jsonl";
  std::vector<Watermark> first;
  std::string digest;
  {
    auto reg = Registry::open(journal, Alphabet::standard(), WatermarkParams{}, 5);
    const auto set = reg.issue(10);
    first = set.watermarks;
    digest = set.commitment;
  }
  {
    auto reg = Registry::open(journal, Alphabet::standard(), WatermarkParams{}, 5);
    EXPECT_EQ(reg.issued_count(), 10u);
    ASSERT_TRUE(reg.find_by_commitment(digest));
    // Same seed, but replayed watermarks are excluded.
    const auto second = reg.issue(10);
    for (const auto& w : second.watermarks) {
      for (const auto& v : first) EXPECT_TRUE(naive_pair_ok(w, v));
    }
    EXPECT_EQ(reg.history().size(), 2u);
  }
  EXPECT_THROW(Registry::open(journal, Alphabet::standard(), WatermarkParams{4, 4, 9, 5}),
               ValidationError);

  std::string content;
  {
    std::ifstream in(journal);
    content.assign(std::istreambuf_iterator<char>(in), {});
  }
  const auto pos = content.find("\"chosen_index\":");
  ASSERT_NE(pos, std::string::npos);
  const auto value_pos = pos + std::string("\"chosen_index\":").size();
  content[value_pos] = content[value_pos] == '1' ? '2' : '1';
  {
    std::ofstream out(journal, std::ios::trunc);
    out << content;
  }
  EXPECT_THROW(Registry::open(journal, Alphabet::standard(), WatermarkParams{}), ValidationError);
}

TEST(Registry, ConcurrentIssuanceStaysDisjoint) {
  Registry reg(Alphabet::standard(), WatermarkParams{}, 8);
  std::vector<CandidateSet> sets(4);
  std::vector<std::thread> threads;
  for (std::size_t t = 0; t < sets.size(); ++t) {
    threads.emplace_back([&, t] { sets[t] = reg.issue(25); });
  }
  for (auto& th : threads) th.join();
  std::vector<Watermark> all;
  for (const auto& s : sets) all.insert(all.end(), s.watermarks.begin(), s.watermarks.end());
  ASSERT_EQ(all.size(), 100u);
  for (std::size_t x = 0; x < all.size(); ++x) {
    for (std::size_t y = x; y < all.size(); ++y) ASSERT_TRUE(naive_pair_ok(all[x], all[y]));
  }
}

TEST(Registry, NeverRepeatsWithinOneSet) {
  Registry reg(Alphabet({0x200B, 0x200C}), WatermarkParams{2, 1, 3, 2}, 4);
  EXPECT_THROW(reg.issue(2), CapacityError);
  EXPECT_EQ(reg.issued_count(), 0u);
}

}  // namespace
}  // namespace ghostmark
