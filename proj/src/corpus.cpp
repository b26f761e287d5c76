#include "hbarena/corpus.hpp"

#include <exception>
#include <optional>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace hbarena {

namespace {

SimulatedRound simulate_one(const CorpusSpec& spec, std::size_t site_index, std::uint32_t round) {
  const auto& s = (*spec.sites)[site_index];
  SimulatedRound out{site_index, simulate_round(s, *spec.partners, spec.master_seed, round), {}, {}, {}};
  out.trace = emit_trace(out.outcome, s, *spec.partners);
  out.truth = make_truth(out.outcome, s.facet);
  out.observed = observe_outcome(out.outcome, s);
  return out;
}

}  // namespace

int max_jobs() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

std::vector<SimulatedRound> simulate_corpus_reference(const CorpusSpec& spec) {
  std::vector<SimulatedRound> out;
  out.reserve(spec.sites->size() * spec.rounds_per_site);
  for (std::size_t i = 0; i < spec.sites->size(); ++i) {
    for (std::uint32_t r = 0; r < spec.rounds_per_site; ++r) out.push_back(simulate_one(spec, i, r));
  }
  return out;
}

std::vector<SimulatedRound> simulate_corpus(const CorpusSpec& spec, int jobs) {
  const auto rounds = static_cast<std::int64_t>(spec.rounds_per_site);
  const auto total = static_cast<std::int64_t>(spec.sites->size()) * rounds;
  std::vector<std::optional<SimulatedRound>> slots(static_cast<std::size_t>(total));
  std::exception_ptr failure;

#pragma omp parallel for schedule(dynamic, 16) num_threads(jobs > 0 ? jobs : 1)
  for (std::int64_t k = 0; k < total; ++k) {
    try {
      slots[static_cast<std::size_t>(k)] =
          simulate_one(spec, static_cast<std::size_t>(k / rounds), static_cast<std::uint32_t>(k % rounds));
    } catch (...) {
#pragma omp critical(hbarena_corpus_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<SimulatedRound> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

std::vector<DetectionResult> detect_corpus_reference(const std::vector<Trace>& traces, const PartnerDirectory& d) {
  std::vector<DetectionResult> out;
  out.reserve(traces.size());
  for (const auto& t : traces) out.push_back(extract_auction_metadata(t, d));
  return out;
}

std::vector<DetectionResult> detect_corpus(const std::vector<Trace>& traces, const PartnerDirectory& d, int jobs) {
  const auto total = static_cast<std::int64_t>(traces.size());
  std::vector<DetectionResult> out(traces.size());
  std::exception_ptr failure;

#pragma omp parallel for schedule(dynamic, 16) num_threads(jobs > 0 ? jobs : 1)
  for (std::int64_t k = 0; k < total; ++k) {
    try {
      out[static_cast<std::size_t>(k)] = extract_auction_metadata(traces[static_cast<std::size_t>(k)], d);
    } catch (...) {
#pragma omp critical(hbarena_detect_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace hbarena
