#pragma once

// Corpus-level kernels. Each site-round is independent (its random streams
// are keyed by site and round), so the OpenMP kernels split work across
// threads with no shared mutable state. The `_reference` variants are plain
// serial loops kept as the oracle for the parallel ones.

#include <cstdint>
#include <string>
#include <vector>

#include "hbarena/auction.hpp"
#include "hbarena/detection.hpp"
#include "hbarena/detector.hpp"
#include "hbarena/domain.hpp"
#include "hbarena/trace.hpp"

namespace hbarena {

struct SimulatedRound {
  std::size_t site_index = 0;
  RoundOutcome outcome;
  Trace trace;
  TruthRecord truth;
  DetectionResult observed;  // ground-truth projection
};

struct CorpusSpec {
  const std::vector<WebsiteScenario>* sites = nullptr;
  const PartnerCatalog* partners = nullptr;
  std::uint64_t master_seed = 0;
  std::uint32_t rounds_per_site = 1;
};

/// Output is ordered by (site index, round) regardless of scheduling.
std::vector<SimulatedRound> simulate_corpus_reference(const CorpusSpec& spec);
std::vector<SimulatedRound> simulate_corpus(const CorpusSpec& spec, int jobs);

std::vector<DetectionResult> detect_corpus_reference(const std::vector<Trace>& traces, const PartnerDirectory& d);
std::vector<DetectionResult> detect_corpus(const std::vector<Trace>& traces, const PartnerDirectory& d, int jobs);

/// Number of worker threads the parallel kernels can use.
int max_jobs();

}  // namespace hbarena
