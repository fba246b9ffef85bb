// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
// criterion fails. Expected values come from the oracles in test_support.hpp
// or are computed here without going through the library.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ghostmark/alphabet.hpp"
#include "ghostmark/decision.hpp"
#include "ghostmark/document.hpp"
#include "ghostmark/embedder.hpp"
#include "ghostmark/error.hpp"
#include "ghostmark/simlab.hpp"
#include "ghostmark/stats.hpp"
#include "ghostmark/verifier.hpp"
#include "ghostmark/watermark_space.hpp"
#include "test_support.hpp"

namespace {

using namespace ghostmark;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  std::string name;
  double budget_seconds;
  std::function<Outcome()> run;
};

std::string fmt(const char* format, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, a);
  return buf;
}

WatermarkParams default_params() { return WatermarkParams{}; }

// ---------------------------------------------------------------------------

Outcome capacity() {
  // 4^20 / (1 + 9 * 4^8), evaluated in long double.
  const long double top = std::pow(4.0L, 20.0L);
  const long double bottom = 1.0L + 9.0L * std::pow(4.0L, 8.0L);
  const long double expected = top / bottom;
  const auto got = capacity_asymmetric(4, 4, 5, 8);
  const long double value = static_cast<long double>(got);
  const bool pass = std::fabs(value - 1864132.0L) <= 1.0L && std::fabs(value - expected) <= 1.0L;
  std::ostringstream d;
  d << "capacity " << got.str() << ", reference " << fmt("%.3f", static_cast<double>(expected));
  return {pass, d.str()};
}

// ---------------------------------------------------------------------------

struct BudgetRow {
  const char* label;
  std::size_t docs;
  double p;
  double printed;
};

Outcome completeness_budget() {
  const std::vector<BudgetRow> rows = {
      {"blog/mistral/30", 30, 0.140, 0.0108},  {"blog/mistral/40", 40, 0.300, 6.4e-7},
      {"blog/mistral/50", 50, 0.588, 5.6e-20}, {"blog/llama/30", 30, 0.747, 3.0e-5},
      {"blog/llama/40", 40, 0.885, 4.5e-21},   {"blog/llama/50", 50, 0.940, 7.7e-42},
      {"poems/mistral/30", 30, 0.000, 1.000},  {"poems/mistral/40", 40, 0.030, 0.305},
      {"poems/mistral/50", 50, 0.132, 9.4e-4}, {"poems/llama/30", 30, 0.253, 5.8e-5},
      {"poems/llama/40", 40, 0.715, 1.9e-9},   {"poems/llama/50", 50, 0.812, 1.1e-22},
  };
  std::size_t ok = 0;
  std::ostringstream d;
  for (const auto& r : rows) {
    const double log_reference = static_cast<double>(r.docs) * std::log10(1.0 - r.p);
    const double log_got = p_fn_log10(r.p, 1, r.docs);
    const double got = p_fn(r.p, 1, r.docs);
    bool row_ok;
    if (r.printed < 1e-10) {
      row_ok = std::fabs(log_got - std::log10(r.printed)) <=
               0.05 * std::fabs(std::log10(r.printed));
    } else {
      row_ok = std::fabs(got - r.printed) <= 0.05 * r.printed;
    }
    row_ok = row_ok && std::fabs(log_got - log_reference) <= 1e-9;
    if (row_ok) {
      ++ok;
    } else {
      char buf[160];
      std::snprintf(buf, sizeof buf, " [%s: computed 1e%.2f, published %.2g]", r.label, log_got,
                    r.printed);
      d << buf;
    }
  }
  std::ostringstream head;
  head << ok << "/" << rows.size() << " operating points reproduced" << d.str();
  return {ok == rows.size(), head.str()};
}

// ---------------------------------------------------------------------------

Watermark random_valid_watermark(std::mt19937_64& rng, std::size_t m, std::size_t n,
                                 std::size_t j) {
  return testing::random_watermark(rng, 4, m, n, j);
}

Outcome authenticity() {
  std::mt19937_64 rng(20240601);
  const Alphabet alphabet = Alphabet::standard();
  const std::size_t docs = 1200;
  std::size_t failures = 0;
  for (std::size_t i = 0; i < docs; ++i) {
    const std::string text = testing::random_text(rng, 2 + rng() % 700);
    auto doc = std::make_shared<const Document>(Document::create("d", text, alphabet));
    const std::size_t m = 1 + rng() % 5, n = 3 + rng() % 8, j = 2 + rng() % (n - 2);
    EmbedParams p = (rng() % 2 == 0) ? EmbedParams{}
                                     : EmbedParams::parse_delta_mode(
                                           "fixed:" + std::to_string(2 + rng() % 80));
    p.step = 1 + rng() % 12;
    p.overlap = 1 + rng() % (j - 1);
    const auto md = mark(doc, random_valid_watermark(rng, m, n, j), p);
    const std::string rendered = md.render(alphabet);
    // Independent strip: drop every alphabet encoding from the raw bytes.
    std::string stripped;
    for (std::size_t b = 0; b < rendered.size();) {
      bool hit = false;
      for (std::size_t l = 0; l < alphabet.size() && !hit; ++l) {
        const auto enc = alphabet.encoded(static_cast<Letter>(l));
        if (rendered.compare(b, enc.size(), enc) == 0) {
          b += enc.size();
          hit = true;
        }
      }
      if (!hit) stripped.push_back(rendered[b++]);
    }
    if (stripped != text || strip_marks(md) != text) ++failures;
  }
  return {failures == 0, std::to_string(docs) + " multi-byte documents, " +
                             std::to_string(failures) + " mismatches"};
}

// ---------------------------------------------------------------------------

// Counts complete signal repetitions by walking the marked elements chunk by
// chunk and matching the expected syllable sequence.
RepetitionCount counted_repetitions(const MarkedDocument& md) {
  const std::size_t j = md.watermark().cue_length();
  const std::size_t n = md.watermark().size();
  const std::size_t o = md.params().overlap;
  RepetitionCount count;
  for (const auto& chunk : md.chunks()) {
    if (chunk.kind == ChunkKind::kUnmarked) continue;
    const bool cue = chunk.kind == ChunkKind::kCue;
    const std::size_t first = cue ? 0 : j - o;
    const std::size_t len = cue ? j - o : n - j + o;
    std::size_t expect = 0, full = 0;
    for (std::size_t e = chunk.first_element; e < chunk.end_element; ++e) {
      const auto& el = md.elements()[e];
      if (el.is_word()) continue;
      if (el.index != first + expect) return {};  // out of order: force mismatch
      if (++expect == len) {
        ++full;
        expect = 0;
      }
    }
    (cue ? count.cue : count.reply) += full;
  }
  return count;
}

Outcome repetition_closed_form() {
  std::mt19937_64 rng(99173);
  const std::size_t configs = 200;
  std::size_t failures = 0;
  for (std::size_t c = 0; c < configs; ++c) {
    const std::size_t words = 2 + rng() % 1200;
    const std::size_t n = 3 + rng() % 10, j = 2 + rng() % (n - 2);
    EmbedParams p = EmbedParams::parse_delta_mode("fixed:" + std::to_string(2 + rng() % 150));
    p.step = 1 + rng() % 15;
    p.overlap = 1 + rng() % (j - 1);
    std::string text;
    for (std::size_t w = 0; w < words; ++w) text += (w ? " w" : "w") + std::to_string(w);
    const auto md =
        mark(Document::create("d", text, Alphabet::standard()), random_valid_watermark(rng, 2, n, j), p);
    if (repetition_count(words, p, j, n) != counted_repetitions(md)) ++failures;
  }
  return {failures == 0,
          std::to_string(configs) + " random configurations, " + std::to_string(failures) +
              " mismatches"};
}

// ---------------------------------------------------------------------------

Outcome constraint_soundness() {
  Registry registry(Alphabet::standard(), default_params(), 31337);
  std::vector<Watermark> all;
  for (int s = 0; s < 10; ++s) {
    const auto set = registry.issue(100);
    all.insert(all.end(), set.watermarks.begin(), set.watermarks.end());
  }
  std::size_t within = 0, cross = 0, violations = 0;
  for (std::size_t a = 0; a < all.size(); ++a) {
    for (std::size_t b = a; b < all.size(); ++b) {
      const bool distinct = a == b || (testing::cue_of(all[a]) != testing::cue_of(all[b]) &&
                                       testing::reply_of(all[a]) != testing::reply_of(all[b]));
      if (!distinct || !testing::naive_pair_ok(all[a], all[b])) ++violations;
      (a / 100 == b / 100 ? within : cross)++;
    }
  }
  std::ostringstream d;
  d << all.size() << " watermarks, " << within << " within-set and " << cross
    << " cross-set pairs, " << violations << " violations";
  return {violations == 0 && cross >= 100000, d.str()};
}

// ---------------------------------------------------------------------------

Outcome challenge_safety() {
  std::mt19937_64 rng(4242);
  const Alphabet alphabet = Alphabet::standard();
  Registry registry(alphabet, default_params(), 5150);
  const auto set = registry.issue(100);
  std::size_t prompts = 0, leaks = 0, rejected = 0;
  const std::size_t docs = 500;
  for (std::size_t i = 0; i < docs; ++i) {
    const auto& w = set.watermarks[rng() % set.size()];
    auto doc = std::make_shared<const Document>(
        Document::create("d", testing::random_text(rng, 2 + rng() % 900), alphabet));
    EmbedParams p = (rng() % 2 == 0) ? EmbedParams{}
                                     : EmbedParams::parse_delta_mode(
                                           "fixed:" + std::to_string(2 + rng() % 120));
    p.step = 1 + rng() % 12;
    p.overlap = 1 + rng() % (w.cue_length() - 1);
    const auto md = mark(doc, w, p);
    std::vector<Challenge> challenges;
    try {
      challenges = build_challenges(md, alphabet);
    } catch (const ValidationError&) {
      ++rejected;
      continue;
    }
    const auto reply = testing::reply_of(w);
    for (const auto& c : challenges) {
      ++prompts;
      if (testing::naive_contains(testing::naive_extract(c.prompt, alphabet), reply)) ++leaks;
    }
  }
  std::ostringstream d;
  d << docs << " marked documents, " << prompts << " prompts, " << leaks
    << " carry the reply, " << rejected << " rejected";
  return {leaks == 0 && rejected == 0 && prompts >= docs, d.str()};
}

// ---------------------------------------------------------------------------

simlab::Scenario ranking_scenario(std::uint64_t seed, std::size_t trials, simlab::Arm arm) {
  simlab::Scenario s;
  s.name = "acceptance";
  s.seed = seed;
  s.trials = trials;
  s.synthetic.name = "short";
  s.synthetic.min_words = 40;
  s.synthetic.mean_words = 60;
  s.synthetic.max_words = 120;
  s.n_marked = 50;
  s.lambda = 1;
  s.ranking = simlab::RankingConfig{100, 1, arm};
  return s;
}

Outcome false_positive_rate() {
  auto s = ranking_scenario(7001, 5000, simlab::Arm::kNull);
  s.n_marked = 3;
  s.filler_invisible_rate = 1.0;  // every output token is an alphabet character
  const auto result = simlab::run_ranking_trials(s);
  const auto& pt = result.points.front();
  const bool pass = pt.ci99.lower <= 0.01;
  std::ostringstream d;
  d << pt.accepted << "/" << pt.trials << " accepted, rate " << fmt("%.4f", pt.accept_rate)
    << ", 99% CI [" << fmt("%.4f", pt.ci99.lower) << ", " << fmt("%.4f", pt.ci99.upper)
    << "], bound " << pt.fpr_bound.str();
  return {pass, d.str()};
}

Outcome true_positive_rate() {
  auto s = ranking_scenario(7002, 200, simlab::Arm::kTrained);
  s.p_curve = simlab::Curve(0.94);
  const auto result = simlab::run_ranking_trials(s);
  const auto& pt = result.points.front();
  const double zero_rate =
      static_cast<double>(pt.all_counterfactuals_zero) / static_cast<double>(pt.trials);
  const bool pass = pt.accepted == pt.trials && zero_rate >= 0.99;
  std::ostringstream d;
  d << pt.accepted << "/" << pt.trials << " accepted, counterfactuals all zero in "
    << pt.all_counterfactuals_zero << "/" << pt.trials << " trials";
  return {pass, d.str()};
}

// ---------------------------------------------------------------------------

Outcome lambda_expectation() {
  const std::vector<double> ps = {0.1, 0.3, 0.6, 0.9};
  const std::vector<std::size_t> lambdas = {1, 2, 4};
  std::size_t bad = 0, points = 0;
  bool monotone = true;
  std::ostringstream d;
  for (double p : ps) {
    double previous = -1.0;
    for (std::size_t lambda : lambdas) {
      simlab::Scenario s;
      s.name = "lambda";
      s.seed = 9000 + points;
      s.trials = 1000;
      s.synthetic.name = "short";
      s.synthetic.min_words = 40;
      s.synthetic.mean_words = 60;
      s.synthetic.max_words = 120;
      s.n_marked = 30;
      s.lambda = lambda;
      s.p_curve = simlab::Curve(p);
      s.output_length = 50;
      const auto result = simlab::run_sweep(s);
      const auto& pt = result.points.front();
      const double n = static_cast<double>(pt.challenges);
      const double q = 1.0 - std::pow(1.0 - p, static_cast<double>(lambda));
      const double expected = n * q;
      const double se = std::sqrt(n * q * (1.0 - q) / static_cast<double>(s.trials));
      const double mean = pt.score.mean;
      if (std::fabs(mean - expected) > 3.0 * se) {
        ++bad;
        d << " [p=" << p << " lambda=" << lambda << ": mean " << fmt("%.3f", mean)
          << ", expected " << fmt("%.3f", expected) << "]";
      }
      if (mean < previous) monotone = false;
      previous = mean;
      ++points;
    }
  }
  std::ostringstream head;
  head << points << " grid points, " << bad << " outside 3 sigma, "
       << (monotone ? "monotone in lambda" : "not monotone in lambda") << d.str();
  return {bad == 0 && monotone, head.str()};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"capacity", 1, capacity},
      {"completeness-budget", 1, completeness_budget},
      {"authenticity", 30, authenticity},
      {"repetition-closed-form", 30, repetition_closed_form},
      {"constraint-soundness", 120, constraint_soundness},
      {"challenge-safety", 60, challenge_safety},
      {"false-positive-rate", 600, false_positive_rate},
      {"true-positive-rate", 600, true_positive_rate},
      {"lambda-expectation", 300, lambda_expectation},
  };
  std::size_t failed = 0;
  for (const auto& c : criteria) {
    const auto start = Clock::now();
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
    const bool in_time = seconds <= c.budget_seconds;
    const bool pass = outcome.pass && in_time;
    if (!pass) ++failed;
    std::cout << (pass ? "PASS " : "FAIL ") << c.name << ": " << outcome.detail << " ("
              << fmt("%.2f", seconds) << "s of " << c.budget_seconds << "s"
              << (in_time ? "" : ", over budget") << ")" << std::endl;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failed == 0 ? 0 : 1;
}
