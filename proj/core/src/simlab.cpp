#include "ghostmark/simlab.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <limits>
#include <memory>
#include <mutex>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

#include "ghostmark/error.hpp"
#include "ghostmark/rng.hpp"
#include "ghostmark/serialization.hpp"
#include "ghostmark/sim_oracle.hpp"
#include "ghostmark/watermark_space.hpp"

namespace ghostmark::simlab {

namespace {

using DocPtr = std::shared_ptr<const Document>;

// Seed streams inside one trial.
enum Stream : std::uint64_t { kCorpus = 11, kShuffle = 12, kRegistry = 21, kOracle = 31, kGeneration = 41 };

template <typename Fn>
void run_parallel(std::size_t tasks, std::size_t workers, Fn&& fn) {
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(tasks, 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < tasks; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < tasks; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = tasks;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

class CorpusSource {
 public:
  explicit CorpusSource(const Scenario& s) : scenario_(s) {
    if (!s.jsonl) return;
    for (auto& entry : read_jsonl(*s.jsonl)) {
      auto doc = std::make_shared<const Document>(Document::create(
          std::move(entry.id), std::move(entry.text), s.alphabet, PreexistingPolicy::kStrip));
      if (doc->word_count() >= 2) loaded_.push_back(std::move(doc));
    }
  }

  std::vector<DocPtr> draw(std::uint64_t trial_seed, std::size_t count) const {
    std::vector<DocPtr> out;
    out.reserve(count);
    if (!scenario_.jsonl) {
      const SyntheticCorpus corpus(scenario_.synthetic, derive_seed(trial_seed, kCorpus));
      for (std::size_t i = 0; i < count; ++i) {
        auto e = corpus.document(i);
        out.push_back(std::make_shared<const Document>(
            Document::create(std::move(e.id), std::move(e.text), scenario_.alphabet)));
      }
      return out;
    }
    if (count > loaded_.size()) {
      throw ValidationError("corpus has " + std::to_string(loaded_.size()) +
                            " usable documents, scenario needs " + std::to_string(count));
    }
    std::vector<std::size_t> order(loaded_.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(trial_seed, kShuffle));
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i = 0; i < count; ++i) out.push_back(loaded_[order[i]]);
    return out;
  }

 private:
  const Scenario& scenario_;
  std::vector<DocPtr> loaded_;
};

FillerConfig filler_for(const Scenario& s) {
  FillerConfig f;
  f.alphabet = s.alphabet;
  f.invisible_rate = s.filler_invisible_rate;
  f.output_length = s.output_length;
  return f;
}

VerifParams verif_for(const Scenario& s, std::uint64_t trial_seed) {
  VerifParams v;
  v.lambda = s.lambda;
  v.settings = s.settings;
  v.settings.seed = derive_seed(trial_seed, kGeneration);
  v.retry.initial_backoff = std::chrono::milliseconds(0);
  return v;
}

std::vector<double> point_values(const Scenario& s) {
  if (s.sweep_axis) return s.sweep_values;
  return {std::numeric_limits<double>::quiet_NaN()};
}

Scenario scenario_at(const Scenario& s, double value) {
  return s.sweep_axis ? s.at(*s.sweep_axis, value) : s;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "";
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

nlohmann::json value_json(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

std::size_t as_count(double value, const char* what) {
  if (!(value >= 0.0) || value != std::floor(value)) {
    throw ValidationError(std::string("sweep value for ") + what + " must be a whole number");
  }
  return static_cast<std::size_t>(value);
}

}  // namespace

Curve::Curve(std::vector<std::pair<double, double>> points) : points_(std::move(points)) {
  std::sort(points_.begin(), points_.end());
}

Curve Curve::from_json(const nlohmann::json& j) {
  if (j.is_number()) return Curve(j.get<double>());
  if (!j.is_array() || j.empty()) throw ValidationError("curve must be a number or [[x, y], ...]");
  std::vector<std::pair<double, double>> points;
  for (const auto& p : j) {
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
      throw ValidationError("curve points must be [x, y] number pairs");
    }
    points.emplace_back(p[0].get<double>(), p[1].get<double>());
  }
  return Curve(std::move(points));
}

nlohmann::json Curve::to_json() const {
  if (points_.size() == 1) return points_.front().second;
  auto out = nlohmann::json::array();
  for (const auto& [x, y] : points_) out.push_back({x, y});
  return out;
}

double Curve::at(double x) const {
  if (points_.empty()) throw ValidationError("empty curve");
  if (x <= points_.front().first) return points_.front().second;
  if (x >= points_.back().first) return points_.back().second;
  const auto hi = std::upper_bound(points_.begin(), points_.end(), x,
                                   [](double v, const auto& p) { return v < p.first; });
  const auto lo = hi - 1;
  const double t = (x - lo->first) / (hi->first - lo->first);
  return lo->second + t * (hi->second - lo->second);
}

Axis parse_axis(const std::string& name) {
  if (name == "n_marked") return Axis::kNMarked;
  if (name == "dataset_size") return Axis::kDatasetSize;
  if (name == "n_watermarks") return Axis::kNWatermarks;
  if (name == "lambda") return Axis::kLambda;
  if (name == "p") return Axis::kHitProb;
  if (name == "filler_invisible_rate") return Axis::kFillerRate;
  throw ValidationError("unknown sweep axis '" + name + "'");
}

const char* to_string(Axis axis) {
  switch (axis) {
    case Axis::kNMarked:
      return "n_marked";
    case Axis::kDatasetSize:
      return "dataset_size";
    case Axis::kNWatermarks:
      return "n_watermarks";
    case Axis::kLambda:
      return "lambda";
    case Axis::kHitProb:
      return "p";
    case Axis::kFillerRate:
      return "filler_invisible_rate";
  }
  return "unknown";
}

Scenario Scenario::from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw ValidationError("scenario must be a JSON object");
  Scenario s;
  s.name = optional_field<std::string>(j, "name", s.name);
  s.seed = optional_field<std::uint64_t>(j, "seed", s.seed);
  s.trials = optional_field<std::size_t>(j, "trials", s.trials);
  s.parallel = optional_field<std::size_t>(j, "parallel", s.parallel);
  s.n_marked = optional_field<std::size_t>(j, "n_marked", s.n_marked);
  s.n_watermarks = optional_field<std::size_t>(j, "n_watermarks", s.n_watermarks);
  s.dataset_size = optional_field<std::size_t>(j, "dataset_size", s.dataset_size);

  if (j.contains("corpus")) {
    const auto& c = j["corpus"];
    if (c.contains("jsonl")) {
      std::filesystem::path p = require_field<std::string>(c, "jsonl");
      s.jsonl = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
    } else if (c.contains("synthetic")) {
      const auto& syn = c["synthetic"];
      if (syn.is_string()) {
        s.synthetic = SyntheticProfile::preset(syn.get<std::string>());
      } else {
        s.synthetic = SyntheticProfile::preset(optional_field<std::string>(syn, "preset", "blog"));
        s.synthetic.name = optional_field<std::string>(syn, "name", s.synthetic.name);
        s.synthetic.min_words = optional_field<std::size_t>(syn, "min_words", s.synthetic.min_words);
        s.synthetic.mean_words = optional_field<double>(syn, "mean_words", s.synthetic.mean_words);
        s.synthetic.max_words = optional_field<std::size_t>(syn, "max_words", s.synthetic.max_words);
        s.synthetic.newline_rate =
            optional_field<double>(syn, "newline_rate", s.synthetic.newline_rate);
      }
    } else {
      throw ValidationError("field 'corpus' needs 'synthetic' or 'jsonl'");
    }
  }
  if (j.contains("watermark")) s.alphabet = params_from_json(j["watermark"], s.params);
  if (j.contains("embed")) {
    const auto& e = j["embed"];
    s.embed = EmbedParams::parse_delta_mode(optional_field<std::string>(e, "delta_mode", "half-doc"));
    s.embed.step = optional_field<std::size_t>(e, "step", s.embed.step);
    s.embed.overlap = optional_field<std::size_t>(e, "overlap", s.embed.overlap);
  }
  if (j.contains("verif")) {
    const auto& v = j["verif"];
    s.lambda = optional_field<std::size_t>(v, "lambda", s.lambda);
    s.settings.max_new_tokens = optional_field<std::size_t>(v, "max_new_tokens", s.settings.max_new_tokens);
    s.settings.temperature = optional_field<double>(v, "temperature", s.settings.temperature);
    s.settings.top_p = optional_field<double>(v, "top_p", s.settings.top_p);
    s.settings.top_k = optional_field<int>(v, "top_k", s.settings.top_k);
  }
  if (j.contains("oracle")) {
    const auto& o = j["oracle"];
    if (o.contains("p_curve")) s.p_curve = Curve::from_json(o["p_curve"]);
    if (o.contains("dataset_curve")) s.dataset_curve = Curve::from_json(o["dataset_curve"]);
    s.filler_invisible_rate =
        optional_field<double>(o, "filler_invisible_rate", s.filler_invisible_rate);
    s.output_length = optional_field<std::size_t>(o, "output_length", s.output_length);
  }
  if (j.contains("sweep")) {
    const auto& sw = j["sweep"];
    s.sweep_axis = parse_axis(require_field<std::string>(sw, "axis"));
    s.sweep_values = require_field<std::vector<double>>(sw, "values");
  }
  if (j.contains("ranking")) {
    const auto& r = j["ranking"];
    RankingConfig rc;
    rc.K = optional_field<std::size_t>(r, "K", rc.K);
    rc.k = optional_field<std::size_t>(r, "k", rc.k);
    const auto arm = optional_field<std::string>(r, "arm", "trained");
    if (arm == "trained") {
      rc.arm = Arm::kTrained;
    } else if (arm == "null") {
      rc.arm = Arm::kNull;
    } else {
      throw ValidationError("field 'ranking.arm' must be trained or null");
    }
    s.ranking = rc;
  }
  s.validate();
  return s;
}

Scenario Scenario::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open scenario " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("scenario " + path.string() + ": " + e.what());
  }
  return from_json(j, path.parent_path());
}

void Scenario::validate() const {
  if (trials < 1) throw ValidationError("trials must be at least 1");
  if (n_marked < 1) throw ValidationError("n_marked must be at least 1");
  if (n_watermarks < 1) throw ValidationError("n_watermarks must be at least 1");
  if (n_marked * n_watermarks > effective_dataset_size()) {
    throw ValidationError("n_marked * n_watermarks exceeds dataset_size");
  }
  if (lambda < 1) throw ValidationError("lambda must be at least 1");
  if (!(filler_invisible_rate >= 0.0 && filler_invisible_rate <= 1.0)) {
    throw ValidationError("filler_invisible_rate must lie in [0, 1]");
  }
  if (output_length < 1) throw ValidationError("output_length must be at least 1");
  if (alphabet.size() != params.alphabet_size) {
    throw ValidationError("alphabet size differs from the watermark parameters");
  }
  params.validate();
  embed.validate(params.cue_syllables, params.total_syllables);
  if (sweep_axis && sweep_values.empty()) throw ValidationError("sweep has no values");
  if (ranking) {
    if (ranking->K < 1 || ranking->k < 1 || ranking->k > ranking->K) {
      throw ValidationError("ranking needs 1 <= k <= K");
    }
  }
  for (double v : sweep_values) at(*sweep_axis, v);
  const double p = hit_prob();
  if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("hit probability outside [0, 1]");
}

double Scenario::hit_prob() const {
  const double p = p_curve.at(static_cast<double>(n_marked)) *
                   dataset_curve.at(static_cast<double>(effective_dataset_size()));
  return std::clamp(p, 0.0, 1.0);
}

Scenario Scenario::at(Axis axis, double value) const {
  Scenario s = *this;
  s.sweep_axis.reset();
  s.sweep_values.clear();
  switch (axis) {
    case Axis::kNMarked:
      s.n_marked = as_count(value, "n_marked");
      break;
    case Axis::kDatasetSize:
      s.dataset_size = as_count(value, "dataset_size");
      break;
    case Axis::kNWatermarks:
      s.n_watermarks = as_count(value, "n_watermarks");
      break;
    case Axis::kLambda:
      s.lambda = as_count(value, "lambda");
      break;
    case Axis::kHitProb:
      s.p_curve = Curve(value);
      s.dataset_curve = Curve(1.0);
      break;
    case Axis::kFillerRate:
      s.filler_invisible_rate = value;
      break;
  }
  if (s.n_marked < 1 || s.n_watermarks < 1 || s.lambda < 1 ||
      s.n_marked * s.n_watermarks > s.effective_dataset_size()) {
    throw ValidationError(std::string("sweep value ") + format_double(value) + " for " +
                          to_string(axis) + " is invalid");
  }
  return s;
}

SweepResult run_sweep(const Scenario& scenario) {
  scenario.validate();
  const CorpusSource source(scenario);
  SweepResult result;
  result.name = scenario.name;
  result.axis = scenario.sweep_axis ? to_string(*scenario.sweep_axis) : "";

  for (double value : point_values(scenario)) {
    const Scenario s = scenario_at(scenario, value);
    const std::size_t U = s.n_watermarks;
    std::vector<std::vector<CollectionResult>> trials(s.trials);

    run_parallel(s.trials, scenario.parallel, [&](std::size_t t) {
      const std::uint64_t trial_seed = derive_seed(s.seed, t);
      Registry registry(s.alphabet, s.params, derive_seed(trial_seed, kRegistry));
      const CandidateSet set = registry.issue(U);
      const auto docs = source.draw(trial_seed, U * s.n_marked);

      MemorizingOracle::Config oc;
      oc.filler = filler_for(s);
      oc.hit_prob = s.hit_prob();
      oc.seed = derive_seed(trial_seed, kOracle);
      MemorizingOracle oracle(oc);
      for (const auto& w : set.watermarks) oracle.train(w);

      const VerifParams verif = verif_for(s, trial_seed);
      for (std::size_t u = 0; u < U; ++u) {
        std::vector<MarkedDocument> marked;
        marked.reserve(s.n_marked);
        for (std::size_t d = 0; d < s.n_marked; ++d) {
          marked.push_back(mark(docs[u * s.n_marked + d], set.watermarks[u], s.embed));
        }
        trials[t].push_back(verif_collection(oracle, marked, verif, s.alphabet));
      }
    });

    SweepPoint point;
    point.value = value;
    point.hit_prob = s.hit_prob();
    point.lambda = s.lambda;
    std::vector<double> scores;
    std::vector<double> rates;
    std::vector<std::vector<double>> per_watermark(U);
    std::size_t challenge_total = 0;
    for (std::size_t t = 0; t < s.trials; ++t) {
      for (std::size_t u = 0; u < U; ++u) {
        const CollectionResult& r = trials[t][u];
        result.rows.push_back({value, t, u, r.score, r.challenges});
        scores.push_back(static_cast<double>(r.score));
        rates.push_back(r.challenges ? static_cast<double>(r.score) / r.challenges : 0.0);
        per_watermark[u].push_back(static_cast<double>(r.score));
        challenge_total += r.challenges;
      }
    }
    point.challenges = challenge_total / (s.trials * U);
    point.score = stats::mean_std(scores);
    point.detection_rate = stats::mean_std(rates);
    const double q = 1.0 - p_fn(point.hit_prob, s.lambda, 1);
    point.expected_score = static_cast<double>(challenge_total) / (s.trials * U) * q;
    for (const auto& w : per_watermark) point.per_watermark.push_back(stats::mean_std(w));
    result.points.push_back(std::move(point));
  }
  return result;
}

RankingResult run_ranking_trials(const Scenario& scenario) {
  scenario.validate();
  if (!scenario.ranking) throw ValidationError("scenario has no 'ranking' section");
  const RankingConfig rc = *scenario.ranking;
  const CorpusSource source(scenario);
  RankingResult result;
  result.name = scenario.name;
  result.arm = rc.arm == Arm::kTrained ? "trained" : "null";
  result.axis = scenario.sweep_axis ? to_string(*scenario.sweep_axis) : "";

  for (double value : point_values(scenario)) {
    const Scenario s = scenario_at(scenario, value);
    std::vector<RankingOutcome> outcomes(s.trials);

    run_parallel(s.trials, scenario.parallel, [&](std::size_t t) {
      const std::uint64_t trial_seed = derive_seed(s.seed, t);
      Registry registry(s.alphabet, s.params, derive_seed(trial_seed, kRegistry));
      const CandidateSet set = registry.issue(rc.K);
      const auto docs = source.draw(trial_seed, s.n_marked);

      DecideOptions options;
      options.k = rc.k;
      options.verif = verif_for(s, trial_seed);
      options.embed = s.embed;
      std::unique_ptr<ChallengeOracle> oracle;
      if (rc.arm == Arm::kTrained) {
        MemorizingOracle::Config oc;
        oc.filler = filler_for(s);
        oc.hit_prob = s.hit_prob();
        oc.seed = derive_seed(trial_seed, kOracle);
        auto memorizing = std::make_unique<MemorizingOracle>(oc);
        memorizing->train(set.chosen());
        oracle = std::move(memorizing);
      } else {
        NullOracle::Config nc;
        nc.filler = filler_for(s);
        nc.seed = derive_seed(trial_seed, kOracle);
        oracle = std::make_unique<NullOracle>(nc);
      }
      outcomes[t] = decide(*oracle, docs, set, s.alphabet, options).outcome;
    });

    RankingPoint point;
    point.value = value;
    point.trials = s.trials;
    point.fpr_bound = fpr_bound(rc.k, rc.K);
    for (std::size_t t = 0; t < s.trials; ++t) {
      const RankingOutcome& o = outcomes[t];
      const std::size_t max_cf =
          o.counterfactual_scores.empty()
              ? 0
              : *std::max_element(o.counterfactual_scores.begin(), o.counterfactual_scores.end());
      result.rows.push_back({value, t, o.target_score, max_cf, o.rank, o.decision});
      if (o.decision) ++point.accepted;
      if (max_cf == 0) ++point.all_counterfactuals_zero;
    }
    point.accept_rate = static_cast<double>(point.accepted) / static_cast<double>(point.trials);
    point.ci95 = stats::clopper_pearson(point.accepted, point.trials, 0.95);
    point.ci99 = stats::clopper_pearson(point.accepted, point.trials, 0.99);
    result.points.push_back(point);
  }
  return result;
}

void write_points_csv(std::ostream& out, const SweepResult& result) {
  out << "axis,value,p,lambda,challenges,mean_score,std_score,mean_rate,std_rate,expected_score\n";
  for (const auto& p : result.points) {
    out << result.axis << ',' << format_double(p.value) << ',' << format_double(p.hit_prob) << ','
        << p.lambda << ',' << p.challenges << ',' << format_double(p.score.mean) << ','
        << format_double(p.score.std) << ',' << format_double(p.detection_rate.mean) << ','
        << format_double(p.detection_rate.std) << ',' << format_double(p.expected_score) << '\n';
  }
}

void write_rows_csv(std::ostream& out, const SweepResult& result) {
  out << "axis,value,trial,watermark,score,challenges\n";
  for (const auto& r : result.rows) {
    out << result.axis << ',' << format_double(r.value) << ',' << r.trial << ',' << r.watermark
        << ',' << r.score << ',' << r.challenges << '\n';
  }
}

nlohmann::ordered_json summary_json(const SweepResult& result) {
  nlohmann::ordered_json j;
  j["name"] = result.name;
  j["mode"] = "sweep";
  j["axis"] = result.axis;
  auto points = nlohmann::ordered_json::array();
  for (const auto& p : result.points) {
    nlohmann::ordered_json pj;
    pj["value"] = value_json(p.value);
    pj["p"] = p.hit_prob;
    pj["lambda"] = p.lambda;
    pj["challenges"] = p.challenges;
    pj["mean_score"] = p.score.mean;
    pj["std_score"] = p.score.std;
    pj["mean_rate"] = p.detection_rate.mean;
    pj["std_rate"] = p.detection_rate.std;
    pj["expected_score"] = p.expected_score;
    auto per = nlohmann::ordered_json::array();
    for (const auto& w : p.per_watermark) per.push_back({{"mean", w.mean}, {"std", w.std}});
    pj["per_watermark"] = std::move(per);
    points.push_back(std::move(pj));
  }
  j["points"] = std::move(points);
  return j;
}

void write_points_csv(std::ostream& out, const RankingResult& result) {
  out << "axis,value,arm,trials,accepted,accept_rate,ci95_low,ci95_high,ci99_low,ci99_high,"
         "all_counterfactuals_zero,fpr_bound\n";
  for (const auto& p : result.points) {
    out << result.axis << ',' << format_double(p.value) << ',' << result.arm << ',' << p.trials
        << ',' << p.accepted << ',' << format_double(p.accept_rate) << ','
        << format_double(p.ci95.lower) << ',' << format_double(p.ci95.upper) << ','
        << format_double(p.ci99.lower) << ',' << format_double(p.ci99.upper) << ','
        << p.all_counterfactuals_zero << ',' << p.fpr_bound.str() << '\n';
  }
}

void write_rows_csv(std::ostream& out, const RankingResult& result) {
  out << "axis,value,trial,target_score,max_counterfactual,rank,decision\n";
  for (const auto& r : result.rows) {
    out << result.axis << ',' << format_double(r.value) << ',' << r.trial << ',' << r.target_score
        << ',' << r.max_counterfactual << ',' << r.rank << ',' << (r.decision ? 1 : 0) << '\n';
  }
}

nlohmann::ordered_json summary_json(const RankingResult& result) {
  nlohmann::ordered_json j;
  j["name"] = result.name;
  j["mode"] = "ranking";
  j["arm"] = result.arm;
  j["axis"] = result.axis;
  auto points = nlohmann::ordered_json::array();
  for (const auto& p : result.points) {
    nlohmann::ordered_json pj;
    pj["value"] = value_json(p.value);
    pj["trials"] = p.trials;
    pj["accepted"] = p.accepted;
    pj["accept_rate"] = p.accept_rate;
    pj["ci95"] = {p.ci95.lower, p.ci95.upper};
    pj["ci99"] = {p.ci99.lower, p.ci99.upper};
    pj["all_counterfactuals_zero"] = p.all_counterfactuals_zero;
    pj["fpr_bound"] = p.fpr_bound.str();
    points.push_back(std::move(pj));
  }
  j["points"] = std::move(points);
  return j;
}

}  // namespace ghostmark::simlab
