#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ghostmark/corpus.hpp"
#include "ghostmark/decision.hpp"
#include "ghostmark/document.hpp"
#include "ghostmark/embedder.hpp"
#include "ghostmark/error.hpp"
#include "ghostmark/file_lock.hpp"
#include "ghostmark/http_oracle.hpp"
#include "ghostmark/rng.hpp"
#include "ghostmark/serialization.hpp"
#include "ghostmark/sim_oracle.hpp"
#include "ghostmark/simlab.hpp"
#include "ghostmark/watermark_space.hpp"

namespace ghostmark::tools {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

constexpr std::size_t kShortDocumentWords = 200;

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kValidation:
    case ErrorKind::kEncoding:
    case ErrorKind::kIo:
      return kExitValidation;
    case ErrorKind::kCapacity:
      return kExitCapacity;
    case ErrorKind::kTransport:
    case ErrorKind::kAuth:
    case ErrorKind::kProtocol:
      return kExitTransport;
    case ErrorKind::kCommitment:
      return kExitCommitment;
    case ErrorKind::kLockContention:
      return kExitLocked;
  }
  return kExitInternal;
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("cannot write " + path.string());
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory " + dir.string());
}

fs::path resolve(const fs::path& base, const std::string& value) {
  const fs::path p(value);
  return p.is_relative() && !base.empty() ? base / p : p;
}

// Values shared by the subcommands: config file first, then flags.
struct Settings {
  Alphabet alphabet = Alphabet::standard();
  WatermarkParams params;
  EmbedParams embed;
  std::size_t lambda = 1;
  GenerationSettings generation;
  std::string registry;
  std::string oracle;
  std::string output_dir = "out";
  std::size_t k = 1;
  std::size_t K = 100;
};

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::size_t parallel = 1;
  std::optional<std::size_t> k;
  std::optional<std::size_t> K;
  std::optional<std::size_t> lambda;
  std::optional<std::size_t> step;
  std::optional<std::size_t> overlap;
  std::optional<std::string> delta_mode;
  std::optional<std::string> template_name;
  std::optional<std::string> registry;
  std::optional<std::string> oracle;
  std::optional<std::string> out;
  bool strict = false;
  bool strip_preexisting = false;
};

Settings load_settings(const Flags& flags) {
  Settings s;
  if (!flags.config.empty()) {
    const fs::path path(flags.config);
    const json j = read_json_file(path);
    if (!j.is_object()) throw ValidationError("config must be a JSON object");
    const fs::path base = path.parent_path();
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
      s.generation.max_new_tokens =
          optional_field<std::size_t>(v, "max_new_tokens", s.generation.max_new_tokens);
      s.generation.temperature = optional_field<double>(v, "temperature", s.generation.temperature);
      s.generation.top_p = optional_field<double>(v, "top_p", s.generation.top_p);
      s.generation.top_k = optional_field<int>(v, "top_k", s.generation.top_k);
    }
    if (j.contains("registry")) s.registry = resolve(base, require_field<std::string>(j, "registry")).string();
    if (j.contains("oracle")) s.oracle = resolve(base, require_field<std::string>(j, "oracle")).string();
    if (j.contains("output_dir")) {
      s.output_dir = resolve(base, require_field<std::string>(j, "output_dir")).string();
    }
    s.k = optional_field<std::size_t>(j, "k", s.k);
    s.K = optional_field<std::size_t>(j, "K", s.K);
  }
  if (flags.k) s.k = *flags.k;
  if (flags.K) s.K = *flags.K;
  if (flags.lambda) s.lambda = *flags.lambda;
  if (flags.delta_mode) s.embed = EmbedParams::parse_delta_mode(*flags.delta_mode, s.embed);
  if (flags.step) s.embed.step = *flags.step;
  if (flags.overlap) s.embed.overlap = *flags.overlap;
  if (flags.registry) s.registry = *flags.registry;
  if (flags.oracle) s.oracle = *flags.oracle;
  if (flags.out) s.output_dir = *flags.out;
  s.embed.validate(s.params.cue_syllables, s.params.total_syllables);
  if (s.lambda < 1) throw ValidationError("--lambda must be at least 1");
  return s;
}

std::uint64_t seed_or_entropy(const Flags& flags, std::ostream& err) {
  if (flags.seed) return *flags.seed;
  const std::uint64_t seed = entropy_seed();
  err << "seed " << seed << '\n';
  return seed;
}

CandidateSet load_candidate_set(const fs::path& path) {
  return candidate_set_from_json(read_json_file(path));
}

std::vector<CorpusEntry> load_corpus(const std::string& corpus, const std::string& text_dir) {
  if (!corpus.empty() && !text_dir.empty()) {
    throw ValidationError("use either --corpus or --text-dir, not both");
  }
  if (!text_dir.empty()) return read_text_dir(text_dir);
  if (corpus.empty()) throw ValidationError("--corpus or --text-dir is required");
  return read_jsonl(fs::path(corpus));
}

ojson manifest_json(const MarkedDocument& md, const CandidateSet& set) {
  ojson m;
  m["id"] = md.original().id();
  m["watermark"] = md.watermark_id();
  m["commitment"] = set.commitment;
  m["delta_mode"] = md.params().delta_mode_string();
  m["delta"] = md.delta();
  m["step"] = md.params().step;
  m["overlap"] = md.params().overlap;
  m["words"] = md.original().word_count();
  auto chunks = ojson::array();
  for (const Chunk& c : md.chunks()) {
    chunks.push_back({{"kind", to_string(c.kind)}, {"first_word", c.first_word},
                      {"end_word", c.end_word}});
  }
  m["chunks"] = std::move(chunks);
  m["challenges"] = md.pair_count();
  const RepetitionCount reps = repetition_count(md.original().word_count(), md.params(),
                                                md.watermark().cue_length(), md.watermark().size());
  m["repetitions"] = {{"cue", reps.cue}, {"reply", reps.reply}};
  m["stripped_preexisting"] = md.original().stripped_preexisting();
  m["short"] = md.original().word_count() < kShortDocumentWords;
  return m;
}

ojson density_json(const DensityReport& r) {
  ojson j;
  j["documents"] = r.documents;
  j["min_words"] = r.min_words;
  j["max_words"] = r.max_words;
  j["mean_words"] = r.mean_words;
  j["std_words"] = r.std_words;
  j["mean_repetitions_per_text"] = r.mean_repetitions;
  j["approx_per_32_words"] = r.approx_per_32_words;
  j["short_documents"] = r.short_documents;
  return j;
}

void print_density(std::ostream& out, const DensityReport& r) {
  out << std::fixed << std::setprecision(1);
  out << "documents " << r.documents << '\n'
      << "words min " << r.min_words << " max " << r.max_words << " mean " << r.mean_words
      << " std " << r.std_words << '\n'
      << "signal repetitions per text " << r.mean_repetitions << '\n'
      << "approx marks per text (1 per 32 words) " << r.approx_per_32_words << '\n'
      << "short documents (<" << kShortDocumentWords << " words) " << r.short_documents << '\n';
  out << std::defaultfloat;
}

// --- gen ---------------------------------------------------------------------

int cmd_gen(const Flags& flags, const std::string& out_file, std::ostream& out,
            std::ostream& err) {
  const Settings s = load_settings(flags);
  if (s.registry.empty()) throw ValidationError("--registry is required");
  if (s.K < 1) throw ValidationError("--K must be at least 1");
  const std::uint64_t seed = seed_or_entropy(flags, err);

  const FileLock lock(s.registry);
  Registry registry = Registry::open(s.registry, s.alphabet, s.params, seed);
  const CandidateSet set = registry.issue(s.K);

  const fs::path path = out_file.empty() ? fs::path(s.output_dir) / "candidate_set.json"
                                         : fs::path(out_file);
  if (path.has_parent_path()) ensure_dir(path.parent_path());
  write_text_file(path, candidate_set_to_json(set).dump(2) + "\n");
  if (set.size() == 1) err << "warning: K=1, the false-positive bound k/K is vacuous\n";
  out << "candidate_set " << path.string() << '\n'
      << "K " << set.size() << '\n'
      << "chosen_index " << set.chosen_index << '\n'
      << "commitment " << set.commitment << '\n';
  return kExitOk;
}

// --- mark --------------------------------------------------------------------

int cmd_mark(const Flags& flags, const std::string& corpus, const std::string& text_dir,
             const std::string& candidates, std::ostream& out, std::ostream& err) {
  const Settings s = load_settings(flags);
  if (candidates.empty()) throw ValidationError("--candidates is required");
  const CandidateSet set = load_candidate_set(candidates);
  verify_commitment(set);
  const Watermark& chosen = set.chosen();
  const auto policy = flags.strip_preexisting ? PreexistingPolicy::kStrip : PreexistingPolicy::kReject;

  const auto entries = load_corpus(corpus, text_dir);
  const fs::path dir(s.output_dir);
  ensure_dir(dir);

  std::vector<MarkedDocument> marked;
  marked.reserve(entries.size());
  for (const auto& entry : entries) {
    auto doc = std::make_shared<const Document>(
        Document::create(entry.id, entry.text, set.alphabet, policy));
    if (doc->stripped_preexisting() > 0) {
      err << "stripped " << doc->stripped_preexisting() << " preexisting alphabet characters from '"
          << doc->id() << "'\n";
    }
    if (doc->word_count() < kShortDocumentWords) {
      if (flags.strict) {
        throw ValidationError("document '" + doc->id() + "' has " +
                              std::to_string(doc->word_count()) + " words (strict mode requires " +
                              std::to_string(kShortDocumentWords) + ")");
      }
      if (doc->word_count() < 2) {
        err << "warning: skipping '" << doc->id() << "' (" << doc->word_count() << " words)\n";
        continue;
      }
      err << "warning: '" << doc->id() << "' is short (" << doc->word_count() << " words)\n";
    }
    marked.push_back(mark(std::move(doc), chosen, s.embed));
  }

  if (text_dir.empty()) {
    auto marked_out = open_output(dir / "marked.jsonl");
    auto manifest_out = open_output(dir / "manifests.jsonl");
    for (const auto& md : marked) {
      ojson line;
      line["id"] = md.original().id();
      line["text"] = md.render(set.alphabet);
      marked_out << line.dump() << '\n';
      manifest_out << manifest_json(md, set).dump() << '\n';
    }
  } else {
    for (const auto& md : marked) {
      write_text_file(dir / (md.original().id() + ".marked.txt"), md.render(set.alphabet));
      write_text_file(dir / (md.original().id() + ".manifest.json"),
                      manifest_json(md, set).dump(2) + "\n");
    }
  }
  const DensityReport report = density_report(marked);
  write_text_file(dir / "density_report.json", density_json(report).dump(2) + "\n");
  out << "marked " << marked.size() << " documents with watermark " << set.chosen_index << " of "
      << set.size() << " into " << dir.string() << '\n';
  print_density(out, report);
  return kExitOk;
}

// --- audit -------------------------------------------------------------------

struct AuditInputs {
  std::vector<std::shared_ptr<const Document>> docs;
  std::optional<EmbedParams> embed;  // taken from manifests when auditing a marked dir
};

AuditInputs load_audit_documents(const std::string& corpus, const std::string& text_dir,
                                 const std::string& marked_dir, const Alphabet& alphabet) {
  AuditInputs inputs;
  std::vector<CorpusEntry> entries;
  if (!marked_dir.empty()) {
    if (!corpus.empty() || !text_dir.empty()) {
      throw ValidationError("use --marked alone or --corpus/--text-dir");
    }
    const fs::path dir(marked_dir);
    entries = read_jsonl(dir / "marked.jsonl");
    std::ifstream manifests(dir / "manifests.jsonl", std::ios::binary);
    std::string line;
    if (manifests && std::getline(manifests, line) && !line.empty()) {
      const json m = json::parse(line);
      EmbedParams e = EmbedParams::parse_delta_mode(require_field<std::string>(m, "delta_mode"));
      e.step = require_field<std::size_t>(m, "step");
      e.overlap = require_field<std::size_t>(m, "overlap");
      inputs.embed = e;
    }
  } else {
    entries = load_corpus(corpus, text_dir);
  }
  for (auto& e : entries) {
    auto doc = std::make_shared<const Document>(
        Document::create(std::move(e.id), std::move(e.text), alphabet, PreexistingPolicy::kStrip));
    if (doc->word_count() < 2) continue;
    inputs.docs.push_back(std::move(doc));
  }
  if (inputs.docs.empty()) throw ValidationError("audit collection has no usable documents");
  return inputs;
}

std::vector<Watermark> trained_watermarks(const fs::path& path) {
  fs::path manifests = path;
  if (fs::is_directory(path)) manifests = path / "manifests.jsonl";
  std::ifstream in(manifests, std::ios::binary);
  if (!in) throw IoError("cannot open " + manifests.string());
  std::vector<Watermark> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Watermark w = Watermark::parse(require_field<std::string>(json::parse(line), "watermark"));
    if (std::find(out.begin(), out.end(), w) == out.end()) out.push_back(std::move(w));
  }
  return out;
}

std::unique_ptr<ChallengeOracle> make_oracle(const fs::path& config_path,
                                             const std::optional<std::string>& template_name,
                                             const Alphabet& alphabet, std::uint64_t seed) {
  const json j = read_json_file(config_path);
  const auto type = optional_field<std::string>(j, "type", "http");
  const fs::path base = config_path.parent_path();
  if (type == "http") {
    EndpointConfig c = EndpointConfig::from_json(j);
    if (template_name) c.request_template = parse_request_template(*template_name);
    return std::make_unique<HttpOracle>(c);
  }
  FillerConfig filler;
  filler.alphabet = alphabet;
  filler.invisible_rate = optional_field<double>(j, "filler_invisible_rate", 0.0);
  filler.output_length = optional_field<std::size_t>(j, "output_length", 200);
  const std::uint64_t oracle_seed = optional_field<std::uint64_t>(j, "seed", seed);
  if (type == "null") {
    return std::make_unique<NullOracle>(NullOracle::Config{filler, oracle_seed});
  }
  if (type == "memorizing") {
    MemorizingOracle::Config c;
    c.filler = filler;
    c.hit_prob = optional_field<double>(j, "hit_prob", 1.0);
    c.seed = oracle_seed;
    auto oracle = std::make_unique<MemorizingOracle>(c);
    for (const auto& w : trained_watermarks(resolve(base, require_field<std::string>(j, "trained")))) {
      oracle->train(w);
    }
    return oracle;
  }
  throw ValidationError("oracle type must be http, memorizing or null");
}

int cmd_audit(const Flags& flags, const std::string& corpus, const std::string& text_dir,
              const std::string& marked_dir, const std::string& candidates,
              const std::string& commitment, std::optional<std::size_t> sample,
              std::ostream& out, std::ostream& err) {
  Settings s = load_settings(flags);
  if (candidates.empty()) throw ValidationError("--candidates is required");
  const CandidateSet set = load_candidate_set(candidates);

  std::optional<std::string> expected;
  if (!commitment.empty()) {
    expected = commitment;
  } else if (!s.registry.empty()) {
    const Registry registry = Registry::open(s.registry, set.alphabet, set.params, 0);
    const auto recorded = registry.find_by_commitment(set.commitment);
    if (!recorded) throw CommitmentError("commitment " + set.commitment + " is not in the registry");
    expected = recorded->commitment;
  }
  verify_commitment(set, expected);

  if (s.oracle.empty()) throw ValidationError("--oracle is required");
  const std::uint64_t seed = seed_or_entropy(flags, err);
  AuditInputs inputs = load_audit_documents(corpus, text_dir, marked_dir, set.alphabet);
  if (inputs.embed && !flags.step && !flags.delta_mode && !flags.overlap) s.embed = *inputs.embed;
  auto oracle = make_oracle(s.oracle, flags.template_name, set.alphabet, seed);

  const fs::path dir(s.output_dir);
  ensure_dir(dir);
  auto transcript = open_output(dir / "transcript.jsonl");
  std::mutex transcript_mutex;

  DecideOptions options;
  options.k = s.k;
  options.verif.lambda = s.lambda;
  options.verif.settings = s.generation;
  options.verif.settings.seed = seed;
  options.embed = s.embed;
  options.sample_size = sample;
  options.sample_seed = derive_seed(seed, 1);
  options.parallel = flags.parallel;
  options.expected_commitment = expected;
  options.sink = [&](const TranscriptEntry& e) {
    ojson line;
    line["watermark"] = e.watermark_id;
    line["doc_id"] = e.doc_id;
    line["challenge"] = e.challenge_index;
    line["attempt"] = e.attempt;
    line["seed"] = e.seed ? json(*e.seed) : json(nullptr);
    line["prompt"] = *e.prompt;
    line["output"] = *e.output;
    line["invisible_length"] = e.invisible_length;
    line["invalid_bytes"] = e.invalid_bytes;
    line["hit"] = e.hit;
    std::lock_guard lock(transcript_mutex);
    transcript << line.dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
  };

  const AuditResult result = decide(*oracle, inputs.docs, set, set.alphabet, options);
  transcript.close();

  {
    auto chunks = open_output(dir / "chunk_results.jsonl");
    for (std::size_t i = 0; i < result.passes.size(); ++i) {
      for (const auto& doc : result.passes[i].docs) {
        for (const auto& c : doc.chunks) {
          ojson line;
          line["watermark_index"] = i + 1;
          line["doc_id"] = c.doc_id;
          line["challenge"] = c.challenge_index;
          line["attempts"] = c.attempts;
          line["hit"] = c.hit;
          line["first_hit_attempt"] = c.first_hit_attempt ? json(*c.first_hit_attempt) : json(nullptr);
          line["invisible_lengths"] = c.raw_invisible_lengths;
          chunks << line.dump() << '\n';
        }
      }
    }
  }

  const RankingOutcome& o = result.outcome;
  ojson report;
  report["commitment"] = set.commitment;
  report["revealed_set_digest_check"] = "ok";
  report["chosen_index"] = set.chosen_index;
  auto scores = ojson::array();
  std::size_t errors = 0;
  for (std::size_t i = 0; i < result.passes.size(); ++i) {
    const auto& p = result.passes[i];
    errors += p.errors.size();
    ojson entry;
    entry["index"] = i + 1;
    entry["watermark"] = set.watermarks[i].canonical();
    entry["score"] = p.score;
    entry["challenges"] = p.challenges;
    auto errs = ojson::array();
    for (const auto& e : p.errors) {
      errs.push_back({{"doc_id", e.doc_id}, {"kind", to_string(e.kind)}, {"message", e.message}});
    }
    entry["errors"] = std::move(errs);
    scores.push_back(std::move(entry));
  }
  report["per_watermark_scores"] = std::move(scores);
  report["target_score"] = o.target_score;
  report["rank"] = o.rank;
  report["k"] = o.k;
  report["K"] = o.K;
  report["decision"] = o.decision;
  report["fpr_bound"] = o.fpr_bound.str();
  report["lambda"] = s.lambda;
  report["documents"] = result.sampled.size();
  report["complete"] = result.complete();
  report["transcript"] = (dir / "transcript.jsonl").string();
  write_text_file(dir / "audit_report.json", report.dump(2) + "\n");

  ojson summary;
  summary["decision"] = o.decision;
  summary["rank"] = o.rank;
  summary["target_score"] = o.target_score;
  summary["max_counterfactual_score"] =
      o.counterfactual_scores.empty()
          ? 0
          : *std::max_element(o.counterfactual_scores.begin(), o.counterfactual_scores.end());
  summary["fpr_bound"] = o.fpr_bound.str();
  summary["complete"] = result.complete();
  write_text_file(dir / "summary.json", summary.dump(2) + "\n");

  out << "decision " << (o.decision ? "member" : "not-member") << '\n'
      << "rank " << o.rank << " of " << o.K << " (k=" << o.k << ")\n"
      << "target_score " << o.target_score << '\n'
      << "fpr_bound " << o.fpr_bound.str() << '\n'
      << "report " << (dir / "audit_report.json").string() << '\n';
  if (!result.complete()) {
    err << "audit incomplete: " << errors << " documents failed with transport errors\n";
    return kExitTransport;
  }
  return kExitOk;
}

// --- simulate ----------------------------------------------------------------

int cmd_simulate(const Flags& flags, const std::string& scenario_path,
                 std::optional<std::size_t> trials, std::ostream& out) {
  simlab::Scenario scenario = simlab::Scenario::load(scenario_path);
  if (flags.seed) scenario.seed = *flags.seed;
  if (trials) scenario.trials = *trials;
  if (flags.parallel > 1) scenario.parallel = flags.parallel;
  if (flags.lambda) scenario.lambda = *flags.lambda;
  scenario.validate();

  const fs::path dir(flags.out.value_or("out"));
  ensure_dir(dir);
  const std::string stem = scenario.name;
  if (scenario.ranking) {
    const auto result = simlab::run_ranking_trials(scenario);
    auto points = open_output(dir / (stem + "_points.csv"));
    simlab::write_points_csv(points, result);
    auto rows = open_output(dir / (stem + "_trials.csv"));
    simlab::write_rows_csv(rows, result);
    write_text_file(dir / (stem + "_summary.json"), simlab::summary_json(result).dump(2) + "\n");
    for (const auto& p : result.points) {
      out << result.arm << " accept_rate " << p.accept_rate << " (" << p.accepted << "/"
          << p.trials << "), fpr_bound " << p.fpr_bound.str() << '\n';
    }
  } else {
    const auto result = simlab::run_sweep(scenario);
    auto points = open_output(dir / (stem + "_points.csv"));
    simlab::write_points_csv(points, result);
    auto rows = open_output(dir / (stem + "_trials.csv"));
    simlab::write_rows_csv(rows, result);
    write_text_file(dir / (stem + "_summary.json"), simlab::summary_json(result).dump(2) + "\n");
    for (const auto& p : result.points) {
      out << result.axis << ' ' << p.value << ": mean " << p.score.mean << " std " << p.score.std
          << " expected " << p.expected_score << '\n';
    }
  }
  out << "wrote " << (dir / (stem + "_points.csv")).string() << '\n';
  return kExitOk;
}

// --- capacity / pfn ----------------------------------------------------------

int cmd_capacity(const Flags& flags, std::ostream& out) {
  const Settings s = load_settings(flags);
  const auto& p = s.params;
  out << "alphabet " << p.alphabet_size << " m " << p.syllable_length << " n "
      << p.total_syllables << " j " << p.cue_syllables << '\n';
  if (p.cue_syllables > p.reply_syllables()) {
    out << "capacity " << capacity_asymmetric(p.alphabet_size, p.syllable_length,
                                              p.cue_syllables, p.total_syllables)
        << '\n';
  } else if (p.cue_syllables == p.reply_syllables()) {
    out << "capacity " << capacity_symmetric(p.alphabet_size, p.syllable_length, p.cue_syllables)
        << '\n';
  } else {
    throw ValidationError("capacity estimate needs j >= n - j");
  }
  return kExitOk;
}

int cmd_pfn(double p, std::size_t lambda, std::size_t docs, std::ostream& out) {
  out << std::setprecision(4) << "p_fn " << p_fn(p, lambda, docs) << '\n'
      << "log10_p_fn " << p_fn_log10(p, lambda, docs) << '\n';
  return kExitOk;
}

void add_watermark_flags(CLI::App* app, Flags& f) {
  app->add_option("--config", f.config, "JSON config file")->check(CLI::ExistingFile);
}

void add_embed_flags(CLI::App* app, Flags& f) {
  app->add_option("--step", f.step, "Words between syllables");
  app->add_option("--overlap", f.overlap, "Cue syllables repeated at the head of reply chunks");
  app->add_option("--delta-mode", f.delta_mode, "half-doc or fixed:N");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"ghostmark: invisible-character cue/reply watermarks for training-data audits"};
  app.name("ghostmark");
  app.require_subcommand(1);
  Flags f;

  auto* gen = app.add_subcommand("gen", "Issue a candidate set from the registry");
  add_watermark_flags(gen, f);
  std::string gen_out;
  gen->add_option("--registry", f.registry, "Registry journal (JSONL)");
  gen->add_option("--K", f.K, "Candidate set size");
  gen->add_option("--seed", f.seed, "RNG seed (default: OS entropy, logged)");
  gen->add_option("--out", gen_out, "Candidate-set file (default <output_dir>/candidate_set.json)");

  auto* mark_cmd = app.add_subcommand("mark", "Mark a corpus with the chosen watermark");
  add_watermark_flags(mark_cmd, f);
  add_embed_flags(mark_cmd, f);
  std::string corpus;
  std::string text_dir;
  std::string candidates;
  mark_cmd->add_option("--corpus", corpus, "JSONL corpus {id, text}");
  mark_cmd->add_option("--text-dir", text_dir, "Directory of .txt files");
  mark_cmd->add_option("--candidates", candidates, "Candidate-set file")->required();
  mark_cmd->add_option("--out", f.out, "Output directory");
  mark_cmd->add_flag("--strict", f.strict, "Reject documents under 200 words");
  mark_cmd->add_flag("--strip-preexisting", f.strip_preexisting,
                     "Remove alphabet characters already present");

  auto* audit = app.add_subcommand("audit", "Run the ranking test against an oracle");
  add_watermark_flags(audit, f);
  add_embed_flags(audit, f);
  std::string marked_dir;
  std::string commitment;
  std::optional<std::size_t> sample;
  audit->add_option("--corpus", corpus, "JSONL corpus {id, text}");
  audit->add_option("--text-dir", text_dir, "Directory of .txt files");
  audit->add_option("--marked", marked_dir, "Output directory of a previous mark run");
  audit->add_option("--candidates", candidates, "Candidate-set file")->required();
  audit->add_option("--commitment", commitment, "Expected commitment digest");
  audit->add_option("--registry", f.registry, "Registry journal used to look up the commitment");
  audit->add_option("--oracle", f.oracle, "Oracle config (JSON)");
  audit->add_option("--template", f.template_name, "raw or chat")
      ->check(CLI::IsMember({"raw", "chat"}));
  audit->add_option("--k", f.k, "Acceptance rank");
  audit->add_option("--lambda", f.lambda, "Generations per challenge");
  audit->add_option("--sample", sample, "Score a random subset of this many documents");
  audit->add_option("--seed", f.seed, "RNG seed (default: OS entropy, logged)");
  audit->add_option("--parallel", f.parallel, "Concurrent scoring passes");
  audit->add_option("--out", f.out, "Output directory");

  auto* simulate = app.add_subcommand("simulate", "Run a Monte Carlo scenario");
  std::string scenario;
  std::optional<std::size_t> trials;
  simulate->add_option("scenario", scenario, "Scenario JSON")->required()->check(CLI::ExistingFile);
  simulate->add_option("--seed", f.seed, "Override the scenario seed");
  simulate->add_option("--trials", trials, "Override the number of trials");
  simulate->add_option("--lambda", f.lambda, "Override lambda");
  simulate->add_option("--parallel", f.parallel, "Concurrent trials");
  simulate->add_option("--out", f.out, "Output directory");

  auto* capacity = app.add_subcommand("capacity", "Estimate the size of the watermark space");
  add_watermark_flags(capacity, f);

  auto* pfn = app.add_subcommand("pfn", "Collection-level miss probability (1-p)^(lambda X)");
  double p = 0.0;
  std::size_t docs = 0;
  std::size_t pfn_lambda = 1;
  pfn->add_option("--p", p, "Per-challenge hit probability")->required()->check(CLI::Range(0.0, 1.0));
  pfn->add_option("--docs", docs, "Number of challenges X")->required();
  pfn->add_option("--lambda", pfn_lambda, "Generations per challenge");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*gen) return cmd_gen(f, gen_out, out, err);
    if (*mark_cmd) return cmd_mark(f, corpus, text_dir, candidates, out, err);
    if (*audit) {
      return cmd_audit(f, corpus, text_dir, marked_dir, candidates, commitment, sample, out, err);
    }
    if (*simulate) return cmd_simulate(f, scenario, trials, out);
    if (*capacity) return cmd_capacity(f, out);
    if (*pfn) return cmd_pfn(p, pfn_lambda, docs, out);
  } catch (const Error& e) {
    err << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const json::exception& e) {
    err << "error (validation): " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitInternal;
}

}  // namespace ghostmark::tools
