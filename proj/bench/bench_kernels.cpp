#include <benchmark/benchmark.h>

#include "hbarena/corpus.hpp"
#include "hbarena/scenario.hpp"

using namespace hbarena;

namespace {

struct Corpus {
  ScenarioFile file;
  std::vector<WebsiteScenario> sites;
  PartnerCatalog catalog;
  PartnerDirectory directory;
  std::vector<Trace> traces;

  Corpus() {
    file = load_scenario_file(std::string(HBARENA_SOURCE_DIR) + "/scenarios/mixed_corpus.json");
    sites = expand_sites(file);
    catalog = file.catalog();
    directory = PartnerDirectory::from_catalog(catalog);
    for (auto& r : simulate_corpus(spec(), max_jobs())) traces.push_back(std::move(r.trace));
  }

  CorpusSpec spec() const { return CorpusSpec{&sites, &catalog, file.master_seed, 1}; }
};

const Corpus& corpus() {
  static const Corpus c;
  return c;
}

void BM_SimulateReference(benchmark::State& state) {
  const auto& c = corpus();
  for (auto _ : state) benchmark::DoNotOptimize(simulate_corpus_reference(c.spec()));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(c.sites.size()));
}

void BM_SimulateParallel(benchmark::State& state) {
  const auto& c = corpus();
  for (auto _ : state) benchmark::DoNotOptimize(simulate_corpus(c.spec(), static_cast<int>(state.range(0))));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(c.sites.size()));
}

void BM_DetectReference(benchmark::State& state) {
  const auto& c = corpus();
  for (auto _ : state) benchmark::DoNotOptimize(detect_corpus_reference(c.traces, c.directory));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(c.traces.size()));
}

void BM_DetectParallel(benchmark::State& state) {
  const auto& c = corpus();
  for (auto _ : state) benchmark::DoNotOptimize(detect_corpus(c.traces, c.directory, static_cast<int>(state.range(0))));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(c.traces.size()));
}

}  // namespace

BENCHMARK(BM_SimulateReference)->UseRealTime()->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SimulateParallel)->RangeMultiplier(2)->Range(1, 8)->UseRealTime()->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DetectReference)->UseRealTime()->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DetectParallel)->RangeMultiplier(2)->Range(1, 8)->UseRealTime()->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
