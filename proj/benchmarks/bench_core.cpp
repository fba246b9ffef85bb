#include <memory>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "ghostmark/alphabet.hpp"
#include "ghostmark/decision.hpp"
#include "ghostmark/document.hpp"
#include "ghostmark/embedder.hpp"
#include "ghostmark/invisible.hpp"
#include "ghostmark/sim_oracle.hpp"
#include "ghostmark/verifier.hpp"
#include "ghostmark/watermark_space.hpp"

namespace {

using namespace ghostmark;

std::string words_text(std::size_t n) {
  std::string out;
  for (std::size_t i = 0; i < n; ++i) out += (i ? " word" : "word") + std::to_string(i);
  return out;
}

const Watermark& sample_watermark() {
  static const Watermark w = Watermark::parse("0.1.2.3-1.2.3.0-2.3.0.1-3.0.1.2-0.0.1.1-2.2.3.3-1.0.3.2-3.1.2.0;j=5");
  return w;
}

void BM_Mark(benchmark::State& state) {
  const auto doc = std::make_shared<const Document>(
      Document::create("d", words_text(static_cast<std::size_t>(state.range(0))),
                       Alphabet::standard()));
  EmbedParams p = EmbedParams::parse_delta_mode("fixed:50");
  for (auto _ : state) {
    auto md = mark(doc, sample_watermark(), p);
    benchmark::DoNotOptimize(md.elements().data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Mark)->Arg(100)->Arg(1000)->Arg(10000);

void BM_Render(benchmark::State& state) {
  const auto doc = std::make_shared<const Document>(
      Document::create("d", words_text(static_cast<std::size_t>(state.range(0))),
                       Alphabet::standard()));
  const auto md = mark(doc, sample_watermark(), EmbedParams::parse_delta_mode("fixed:50"));
  for (auto _ : state) benchmark::DoNotOptimize(md.render(Alphabet::standard()));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Render)->Arg(1000)->Arg(10000);

void BM_Extract(benchmark::State& state) {
  const auto doc = std::make_shared<const Document>(
      Document::create("d", words_text(static_cast<std::size_t>(state.range(0))),
                       Alphabet::standard()));
  const auto md = mark(doc, sample_watermark(), EmbedParams::parse_delta_mode("fixed:50"));
  const std::string text = md.render(Alphabet::standard());
  for (auto _ : state) benchmark::DoNotOptimize(extract_invisible(text, Alphabet::standard()));
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(text.size()));
}
BENCHMARK(BM_Extract)->Arg(1000)->Arg(10000);

void BM_RegistryIssue(benchmark::State& state) {
  for (auto _ : state) {
    Registry registry(Alphabet::standard(), WatermarkParams{}, 17);
    benchmark::DoNotOptimize(registry.issue(static_cast<std::size_t>(state.range(0))));
  }
}
BENCHMARK(BM_RegistryIssue)->Arg(10)->Arg(100)->Arg(1000);

void BM_Decide(benchmark::State& state) {
  Registry registry(Alphabet::standard(), WatermarkParams{}, 23);
  const auto set = registry.issue(static_cast<std::size_t>(state.range(0)));
  std::vector<std::shared_ptr<const Document>> docs;
  for (int i = 0; i < 10; ++i) {
    docs.push_back(std::make_shared<const Document>(
        Document::create("d" + std::to_string(i), words_text(300), Alphabet::standard())));
  }
  MemorizingOracle oracle(MemorizingOracle::Config{{}, 0.5, 5});
  oracle.train(set.chosen());
  DecideOptions options;
  options.verif.settings.seed = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(decide(oracle, docs, set, Alphabet::standard(), options));
  }
}
BENCHMARK(BM_Decide)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
