#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "ghostmark/alphabet.hpp"
#include "ghostmark/corpus.hpp"
#include "ghostmark/decision.hpp"
#include "ghostmark/embedder.hpp"
#include "ghostmark/stats.hpp"
#include "ghostmark/watermark.hpp"

namespace ghostmark::simlab {

// Piecewise-linear function, constant beyond its end points.
class Curve {
 public:
  Curve() = default;
  explicit Curve(double constant) : points_{{0.0, constant}} {}
  explicit Curve(std::vector<std::pair<double, double>> points);

  // A number or a list of [x, y] pairs.
  static Curve from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  double at(double x) const;
  bool empty() const noexcept { return points_.empty(); }

 private:
  std::vector<std::pair<double, double>> points_;
};

enum class Axis { kNMarked, kDatasetSize, kNWatermarks, kLambda, kHitProb, kFillerRate };

Axis parse_axis(const std::string& name);
const char* to_string(Axis axis);

enum class Arm { kTrained, kNull };

struct RankingConfig {
  std::size_t K = 100;
  std::size_t k = 1;
  Arm arm = Arm::kTrained;
};

struct Scenario {
  std::string name = "scenario";
  std::uint64_t seed = 0;
  std::size_t trials = 5;
  std::size_t parallel = 1;

  SyntheticProfile synthetic = SyntheticProfile::preset("blog");
  std::optional<std::filesystem::path> jsonl;  // replaces the synthetic corpus

  std::size_t n_marked = 30;      // documents per watermark
  std::size_t n_watermarks = 1;   // U
  std::size_t dataset_size = 0;   // 0 means n_marked * U

  Alphabet alphabet = Alphabet::standard();
  WatermarkParams params;
  EmbedParams embed;
  std::size_t lambda = 1;
  GenerationSettings settings;

  Curve p_curve{0.5};        // hit probability as a function of n_marked
  Curve dataset_curve{1.0};  // multiplier as a function of dataset size
  double filler_invisible_rate = 0.0;
  std::size_t output_length = 200;

  std::optional<Axis> sweep_axis;
  std::vector<double> sweep_values;

  std::optional<RankingConfig> ranking;

  // Relative corpus paths resolve against `base_dir`.
  static Scenario from_json(const nlohmann::json& j,
                            const std::filesystem::path& base_dir = {});
  static Scenario load(const std::filesystem::path& path);

  // Throws ValidationError (trials >= 1, n_marked * U <= dataset size, ...).
  void validate() const;

  std::size_t effective_dataset_size() const noexcept {
    return dataset_size == 0 ? n_marked * n_watermarks : dataset_size;
  }
  double hit_prob() const;

  // Copy with the swept parameter set to `value`.
  Scenario at(Axis axis, double value) const;
};

struct SweepRow {
  double value = 0.0;
  std::size_t trial = 0;
  std::size_t watermark = 0;
  std::size_t score = 0;
  std::size_t challenges = 0;
};

struct SweepPoint {
  double value = 0.0;
  double hit_prob = 0.0;
  std::size_t lambda = 1;
  std::size_t challenges = 0;      // per watermark
  stats::MeanStd score;            // over trials and watermarks
  stats::MeanStd detection_rate;   // score / challenges
  double expected_score = 0.0;     // challenges * (1 - (1 - p)^lambda)
  std::vector<stats::MeanStd> per_watermark;
};

struct SweepResult {
  std::string name;
  std::string axis;
  std::vector<SweepPoint> points;
  std::vector<SweepRow> rows;
};

SweepResult run_sweep(const Scenario& scenario);

struct RankingRow {
  double value = 0.0;
  std::size_t trial = 0;
  std::size_t target_score = 0;
  std::size_t max_counterfactual = 0;
  std::size_t rank = 0;
  bool decision = false;
};

struct RankingPoint {
  double value = 0.0;
  std::size_t trials = 0;
  std::size_t accepted = 0;
  double accept_rate = 0.0;
  stats::Interval ci95;
  stats::Interval ci99;
  std::size_t all_counterfactuals_zero = 0;
  Rational fpr_bound;
};

struct RankingResult {
  std::string name;
  std::string arm;
  std::string axis;
  std::vector<RankingPoint> points;
  std::vector<RankingRow> rows;
};

RankingResult run_ranking_trials(const Scenario& scenario);

void write_points_csv(std::ostream& out, const SweepResult& result);
void write_rows_csv(std::ostream& out, const SweepResult& result);
nlohmann::ordered_json summary_json(const SweepResult& result);

void write_points_csv(std::ostream& out, const RankingResult& result);
void write_rows_csv(std::ostream& out, const RankingResult& result);
nlohmann::ordered_json summary_json(const RankingResult& result);

}  // namespace ghostmark::simlab
