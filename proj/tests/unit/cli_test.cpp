#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "ghostmark/file_lock.hpp"
#include "stub_server.hpp"
#include "test_support.hpp"

namespace ghostmark {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli(std::vector<std::string> args) {
  args.insert(args.begin(), "ghostmark");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = tools::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::vector<json> jsonl(const fs::path& p) {
  std::vector<json> out;
  std::ifstream in(p);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(json::parse(line));
  }
  return out;
}

void write_corpus(const fs::path& path, std::size_t docs, std::size_t words) {
  std::ofstream out(path);
  for (std::size_t d = 0; d < docs; ++d) {
    std::string text;
    for (std::size_t w = 0; w < words; ++w) {
      text += (w ? " d" : "d") + std::to_string(d) + "w" + std::to_string(w);
    }
    out << json{{"id", "doc" + std::to_string(d)}, {"text", text}}.dump() << '\n';
  }
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = testing::temp_dir(::testing::UnitTest::GetInstance()->current_test_info()->name());
    registry = (dir / "registry.jsonl").string();
    candidates = (dir / "cs.json").string();
  }

  void gen(std::size_t K, std::uint64_t seed = 1) {
    const auto r = cli({"gen", "--registry", registry, "--K", std::to_string(K), "--seed",
                        std::to_string(seed), "--out", candidates});
    ASSERT_EQ(r.code, 0) << r.err;
  }

  fs::path dir;
  std::string registry;
  std::string candidates;
};

TEST_F(CliTest, GenWritesCommittedSet) {
  const auto r = cli({"gen", "--registry", registry, "--K", "10", "--seed", "3", "--out", candidates});
  ASSERT_EQ(r.code, 0) << r.err;
  const json cs = json::parse(slurp(candidates));
  EXPECT_EQ(cs["watermarks"].size(), 10u);
  EXPECT_NE(r.out.find("commitment " + cs["commitment"].get<std::string>()), std::string::npos);
  EXPECT_EQ(jsonl(registry).size(), 1u);
  EXPECT_EQ(r.err.find("vacuous"), std::string::npos);

  const auto again = cli({"gen", "--registry", registry, "--K", "10", "--seed", "3", "--out",
                          (dir / "cs2.json").string()});
  ASSERT_EQ(again.code, 0) << again.err;
  const json cs2 = json::parse(slurp(dir / "cs2.json"));
  for (const auto& a : cs["watermarks"]) {
    for (const auto& b : cs2["watermarks"]) EXPECT_NE(a, b);
  }
  EXPECT_EQ(jsonl(registry).size(), 2u);
}

TEST_F(CliTest, GenWarnsForSingleCandidate) {
  const auto r = cli({"gen", "--registry", registry, "--K", "1", "--seed", "1", "--out", candidates});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.err.find("vacuous"), std::string::npos);
}

TEST_F(CliTest, GenLogsEntropySeed) {
  const auto r = cli({"gen", "--registry", registry, "--K", "2", "--out", candidates});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.err.rfind("seed ", 0), 0u);
}

TEST_F(CliTest, GenLockContention) {
  const FileLock held(registry);
  const auto r = cli({"gen", "--registry", registry, "--K", "2", "--seed", "1", "--out", candidates});
  EXPECT_EQ(r.code, tools::kExitLocked) << r.err;
}

TEST_F(CliTest, GenCapacityExhaustion) {
  const auto config = dir / "tiny.json";
  std::ofstream(config) << R"({"watermark":{"alphabet":["U+200B","U+200C"],"m":1,"n":3,"j":2}})";
  const auto r = cli({"gen", "--config", config.string(), "--registry", registry, "--K", "3",
                      "--seed", "1", "--out", candidates});
  EXPECT_EQ(r.code, tools::kExitCapacity) << r.err;
}

TEST_F(CliTest, MarkWritesOutputsAndManifests) {
  gen(5);
  const auto corpus = dir / "corpus.jsonl";
  write_corpus(corpus, 3, 250);
  const auto out = dir / "marked";
  const auto r = cli({"mark", "--corpus", corpus.string(), "--candidates", candidates, "--out",
                      out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto marked = jsonl(out / "marked.jsonl");
  const auto manifests = jsonl(out / "manifests.jsonl");
  ASSERT_EQ(marked.size(), 3u);
  ASSERT_EQ(manifests.size(), 3u);
  const json cs = json::parse(slurp(candidates));
  const std::size_t chosen = cs["chosen_index"];
  EXPECT_EQ(manifests[0]["watermark"], cs["watermarks"][chosen - 1]);
  EXPECT_EQ(manifests[0]["commitment"], cs["commitment"]);
  EXPECT_EQ(manifests[0]["delta"], 125);
  EXPECT_EQ(manifests[0]["challenges"], 1);
  EXPECT_FALSE(manifests[0]["short"].get<bool>());
  EXPECT_TRUE(fs::exists(out / "density_report.json"));
  EXPECT_NE(r.out.find("signal repetitions per text"), std::string::npos);
  // Visible text is untouched.
  const auto original = jsonl(corpus);
  const Alphabet a = Alphabet::standard();
  for (std::size_t i = 0; i < 3; ++i) {
    const std::string text = marked[i]["text"];
    std::string visible;
    std::size_t pos = 0;
    while (pos < text.size()) {
      bool skipped = false;
      for (Letter l = 0; l < 4; ++l) {
        const auto enc = a.encoded(l);
        if (text.compare(pos, enc.size(), enc) == 0) {
          pos += enc.size();
          skipped = true;
          break;
        }
      }
      if (!skipped) visible.push_back(text[pos++]);
    }
    EXPECT_EQ(visible, original[i]["text"]);
  }
}

TEST_F(CliTest, MarkShortDocumentsWarnOrFail) {
  gen(3);
  const auto corpus = dir / "corpus.jsonl";
  write_corpus(corpus, 2, 50);
  auto r = cli({"mark", "--corpus", corpus.string(), "--candidates", candidates, "--out",
                (dir / "o1").string()});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.err.find("is short"), std::string::npos);
  r = cli({"mark", "--corpus", corpus.string(), "--candidates", candidates, "--out",
           (dir / "o2").string(), "--strict"});
  EXPECT_EQ(r.code, tools::kExitValidation);
}

TEST_F(CliTest, MarkEmptyCorpus) {
  gen(3);
  const auto corpus = dir / "empty.jsonl";
  std::ofstream(corpus) << "";
  const auto r = cli({"mark", "--corpus", corpus.string(), "--candidates", candidates, "--out",
                      (dir / "o").string()});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("marked 0 documents"), std::string::npos);
}

TEST_F(CliTest, MarkPreexistingCharacters) {
  gen(3);
  const auto corpus = dir / "corpus.jsonl";
  std::ofstream(corpus) << json{{"id", "x"}, {"text", "alpha\xE2\x80\x8B beta gamma"}}.dump() << '\n';
  auto r = cli({"mark", "--corpus", corpus.string(), "--candidates", candidates, "--out",
                (dir / "o").string()});
  EXPECT_EQ(r.code, tools::kExitValidation);
  r = cli({"mark", "--corpus", corpus.string(), "--candidates", candidates, "--out",
           (dir / "o").string(), "--strip-preexisting"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.err.find("stripped 1"), std::string::npos);
  EXPECT_EQ(jsonl(dir / "o" / "manifests.jsonl")[0]["stripped_preexisting"], 1);
}

TEST_F(CliTest, MarkInvalidUtf8) {
  gen(3);
  const auto corpus = dir / "bad.jsonl";
  std::ofstream(corpus) << "{\"id\":\"x\",\"text\":\"ok \xFF bad\"}\n";
  const auto r = cli({"mark", "--corpus", corpus.string(), "--candidates", candidates, "--out",
                      (dir / "o").string()});
  EXPECT_EQ(r.code, tools::kExitValidation);
}

TEST_F(CliTest, MarkTextDirectory) {
  gen(3);
  const auto texts = dir / "texts";
  fs::create_directories(texts);
  std::ofstream(texts / "one.txt") << "a b c d e f g h i j k l";
  const auto r = cli({"mark", "--text-dir", texts.string(), "--candidates", candidates, "--out",
                      (dir / "o").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir / "o" / "one.marked.txt"));
  EXPECT_TRUE(fs::exists(dir / "o" / "one.manifest.json"));
}

class AuditTest : public CliTest {
 protected:
  void SetUp() override {
    CliTest::SetUp();
    gen(8, 11);
    corpus = dir / "corpus.jsonl";
    write_corpus(corpus, 4, 80);
    const auto r = cli({"mark", "--corpus", corpus.string(), "--candidates", candidates, "--out",
                        (dir / "marked").string()});
    ASSERT_EQ(r.code, 0) << r.err;
  }

  std::string oracle_file(const json& j) {
    const auto p = dir / "oracle.json";
    std::ofstream(p) << j.dump();
    return p.string();
  }

  fs::path corpus;
};

TEST_F(AuditTest, MemorizingOracleGivesMembership) {
  const auto oracle = oracle_file({{"type", "memorizing"}, {"trained", "marked"}});
  const auto out = dir / "audit";
  const auto r = cli({"audit", "--marked", (dir / "marked").string(), "--candidates", candidates,
                      "--oracle", oracle, "--seed", "5", "--out", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("decision member"), std::string::npos);
  const json report = json::parse(slurp(out / "audit_report.json"));
  EXPECT_EQ(report["rank"], 1);
  EXPECT_EQ(report["K"], 8);
  EXPECT_EQ(report["target_score"], 4);
  EXPECT_EQ(report["fpr_bound"], "1/8");
  EXPECT_EQ(report["per_watermark_scores"].size(), 8u);
  EXPECT_TRUE(report["complete"].get<bool>());
  const auto transcript = jsonl(out / "transcript.jsonl");
  EXPECT_EQ(transcript.size(), 32u);
  EXPECT_EQ(jsonl(out / "chunk_results.jsonl").size(), 32u);
  EXPECT_TRUE(fs::exists(out / "summary.json"));
}

TEST_F(AuditTest, NullOracleRejects) {
  const auto oracle = oracle_file({{"type", "null"}});
  const auto r = cli({"audit", "--corpus", corpus.string(), "--candidates", candidates, "--oracle",
                      oracle, "--seed", "5", "--out", (dir / "audit").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("decision not-member"), std::string::npos);
}

TEST_F(AuditTest, EchoStubOverHttp) {
  tools::StubServer server(tools::StubConfig{});
  server.start();
  const auto oracle = oracle_file({{"type", "http"}, {"url", server.url()}, {"timeout_ms", 5000}});
  const auto r = cli({"audit", "--corpus", corpus.string(), "--candidates", candidates, "--oracle",
                      oracle, "--seed", "5", "--sample", "2", "--out", (dir / "audit").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(server.request_count(), 16u);
  // Echoed prompts never carry a reply, so nothing scores.
  const json report = json::parse(slurp(dir / "audit" / "audit_report.json"));
  EXPECT_EQ(report["target_score"], 0);
  EXPECT_EQ(report["documents"], 2);
}

TEST_F(AuditTest, TamperedCandidateSetMakesNoRequests) {
  tools::StubServer server(tools::StubConfig{});
  server.start();
  const auto oracle = oracle_file({{"type", "http"}, {"url", server.url()}});
  json cs = json::parse(slurp(candidates));
  std::swap(cs["watermarks"][0], cs["watermarks"][1]);
  const auto tampered = dir / "tampered.json";
  std::ofstream(tampered) << cs.dump(2);
  auto r = cli({"audit", "--corpus", corpus.string(), "--candidates", tampered.string(),
                "--oracle", oracle, "--seed", "5", "--out", (dir / "audit").string()});
  EXPECT_EQ(r.code, tools::kExitCommitment) << r.err;

  r = cli({"audit", "--corpus", corpus.string(), "--candidates", candidates, "--commitment",
           std::string(64, 'a'), "--oracle", oracle, "--seed", "5", "--out",
           (dir / "audit").string()});
  EXPECT_EQ(r.code, tools::kExitCommitment);

  cs = json::parse(slurp(candidates));
  cs["commitment"] = std::string(64, 'b');
  std::ofstream(tampered, std::ios::trunc) << cs.dump(2);
  r = cli({"audit", "--corpus", corpus.string(), "--candidates", tampered.string(), "--registry",
           registry, "--oracle", oracle, "--seed", "5", "--out", (dir / "audit").string()});
  EXPECT_EQ(r.code, tools::kExitCommitment);
  EXPECT_EQ(server.request_count(), 0u);
}

TEST_F(AuditTest, RegistryCommitmentAccepted) {
  const auto oracle = oracle_file({{"type", "null"}});
  const auto r = cli({"audit", "--corpus", corpus.string(), "--candidates", candidates,
                      "--registry", registry, "--oracle", oracle, "--seed", "5", "--out",
                      (dir / "audit").string()});
  EXPECT_EQ(r.code, 0) << r.err;
}

TEST_F(AuditTest, AuthFailureExitCode) {
  tools::StubConfig cfg;
  cfg.required_token = "token";
  tools::StubServer server(cfg);
  server.start();
  const auto oracle = oracle_file(
      {{"type", "http"}, {"url", server.url()}, {"auth_env", "GHOSTMARK_CLI_TEST_UNSET"}});
  const auto r = cli({"audit", "--corpus", corpus.string(), "--candidates", candidates, "--oracle",
                      oracle, "--seed", "5", "--out", (dir / "audit").string()});
  EXPECT_EQ(r.code, tools::kExitTransport);
  EXPECT_EQ(server.request_count(), 1u);
}

TEST_F(AuditTest, MissingFieldIsIncompleteAudit) {
  tools::StubConfig cfg;
  cfg.text_field = "output";
  tools::StubServer server(cfg);
  server.start();
  const auto oracle = oracle_file({{"type", "http"}, {"url", server.url()}});
  const auto r = cli({"audit", "--corpus", corpus.string(), "--candidates", candidates, "--oracle",
                      oracle, "--seed", "5", "--out", (dir / "audit").string()});
  EXPECT_EQ(r.code, tools::kExitTransport);
  EXPECT_NE(r.err.find("incomplete"), std::string::npos);
  const json report = json::parse(slurp(dir / "audit" / "audit_report.json"));
  EXPECT_FALSE(report["complete"].get<bool>());
  const auto& errors = report["per_watermark_scores"][0]["errors"];
  ASSERT_FALSE(errors.empty());
  EXPECT_EQ(errors[0]["kind"], "protocol");
}

TEST_F(AuditTest, EmptyCollectionIsValidationError) {
  const auto empty = dir / "empty.jsonl";
  std::ofstream(empty) << "";
  const auto r = cli({"audit", "--corpus", empty.string(), "--candidates", candidates, "--oracle",
                      oracle_file({{"type", "null"}}), "--seed", "1", "--out",
                      (dir / "audit").string()});
  EXPECT_EQ(r.code, tools::kExitValidation);
}

TEST(CliSimulate, ByteIdenticalForFixedSeed) {
  const auto dir = testing::temp_dir("simulate");
  const auto scenario = dir / "s.json";
  std::ofstream(scenario) << R"({
    "name": "tiny", "seed": 9, "trials": 2,
    "corpus": {"synthetic": {"preset": "blog", "min_words": 20, "mean_words": 30, "max_words": 60}},
    "n_marked": 5, "oracle": {"p_curve": 0.5, "output_length": 10},
    "sweep": {"axis": "n_marked", "values": [3, 5]}
  })";
  auto r = cli({"simulate", scenario.string(), "--out", (dir / "a").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  r = cli({"simulate", scenario.string(), "--out", (dir / "b").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* f : {"tiny_points.csv", "tiny_trials.csv", "tiny_summary.json"}) {
    EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;
    EXPECT_FALSE(slurp(dir / "a" / f).empty());
  }
  r = cli({"simulate", scenario.string(), "--seed", "10", "--out", (dir / "c").string()});
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(slurp(dir / "a" / "tiny_trials.csv"), slurp(dir / "c" / "tiny_trials.csv"));
  r = cli({"simulate", scenario.string(), "--trials", "0", "--out", (dir / "d").string()});
  EXPECT_EQ(r.code, tools::kExitValidation);
}

TEST(CliMisc, CapacityAndPfn) {
  auto r = cli({"capacity"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("capacity 1864132"), std::string::npos);
  r = cli({"pfn", "--p", "0.588", "--docs", "50"});
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("p_fn 5.557e-20"), std::string::npos) << r.out;
  r = cli({"pfn", "--p", "2", "--docs", "50"});
  EXPECT_EQ(r.code, tools::kExitValidation);
}

TEST(CliMisc, UsageErrors) {
  EXPECT_EQ(cli({}).code, tools::kExitValidation);
  EXPECT_EQ(cli({"bogus"}).code, tools::kExitValidation);
  EXPECT_EQ(cli({"gen", "--K", "3"}).code, tools::kExitValidation);
  EXPECT_EQ(cli({"mark"}).code, tools::kExitValidation);
  EXPECT_EQ(cli({"--help"}).code, tools::kExitOk);
}

}  // namespace
}  // namespace ghostmark
