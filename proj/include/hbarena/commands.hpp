#pragma once

// Batch runner behind the `hbarena` CLI. Each command returns a process exit
// code and writes human-readable output to the given streams.
//
// Run directory layout written by simulate:
//   traces/<site>__r<round>.jsonl        browser-observable trace
//   truth/<site>__r<round>.truth.jsonl   ground-truth sidecar
//   outcomes.jsonl                       ground-truth observation records
//   sites.jsonl                          site ranks (public list metadata)
//   directory.json                       partner directory from the scenario
//   manifest.json                        seed, version, facet counts, digests

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hbarena/detection.hpp"
#include "hbarena/trace.hpp"

namespace hbarena {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitRuntime = 2,
  kExitDetectErrors = 3,
};

inline constexpr const char* kSeedEnvVar = "HBARENA_SEED";
const char* tool_version();

struct SimulateOptions {
  std::filesystem::path scenario;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
  int jobs = 1;
};

struct DetectOptions {
  std::filesystem::path run_dir;
  std::optional<std::filesystem::path> trace_dir;    // default run_dir/traces
  std::optional<std::filesystem::path> directory;    // default run_dir/directory.json
  std::optional<std::filesystem::path> results;      // default run_dir/results.jsonl
  bool score = false;
  int jobs = 1;
};

struct ReportOptions {
  std::filesystem::path run_dir;
  std::optional<std::filesystem::path> input;        // default run_dir/results.jsonl
  std::vector<std::string> reports;                  // empty or {"all"} = every report
  bool include_zero_bid_auctions = false;
};

int cmd_simulate(const SimulateOptions& opts, std::ostream& out, std::ostream& err);
int cmd_detect(const DetectOptions& opts, std::ostream& out, std::ostream& err);
int cmd_report(const ReportOptions& opts, std::ostream& out, std::ostream& err);

struct DetectionScore {
  std::size_t true_positive = 0;
  std::size_t false_positive = 0;
  std::size_t false_negative = 0;
  std::size_t true_negative = 0;
  std::size_t facet_correct = 0;
  std::size_t late_count_agree = 0;
  std::size_t scored = 0;

  double precision() const;
  double recall() const;
  double facet_accuracy() const;
};

DetectionScore score_detection(const std::vector<DetectionResult>& results, const std::vector<TruthRecord>& truth);

std::vector<DetectionResult> read_results(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view text);
std::string read_text(const std::filesystem::path& path);

}  // namespace hbarena
