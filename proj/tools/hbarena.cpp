#include <iostream>

#include <CLI11.hpp>

#include "hbarena/commands.hpp"
#include "hbarena/corpus.hpp"

int main(int argc, char** argv) {
  CLI::App app{"hbarena: header bidding simulator, detector and analytics"};
  app.set_version_flag("--version", std::string(hbarena::tool_version()));
  app.require_subcommand(1);

  hbarena::SimulateOptions sim;
  std::uint64_t seed = 0;
  std::string sim_out;
  auto* simulate = app.add_subcommand("simulate", "run a scenario and write traces, truth and a manifest");
  simulate->add_option("--scenario", sim.scenario, "scenario JSON file")->required()->check(CLI::ExistingFile);
  auto* seed_opt = simulate->add_option("--seed", seed, "master seed (overrides the file and HBARENA_SEED)");
  simulate->add_option("--out", sim_out, "output run directory (default: the scenario's output_dir)");
  simulate->add_option("--jobs", sim.jobs, "worker threads")->check(CLI::PositiveNumber);

  hbarena::DetectOptions det;
  std::string det_traces, det_directory, det_results;
  auto* detect = app.add_subcommand("detect", "detect HB and extract auction metadata from traces");
  detect->add_option("--out", det.run_dir, "run directory")->required();
  detect->add_option("--traces", det_traces, "trace directory (default: <out>/traces)");
  detect->add_option("--directory", det_directory, "partner directory JSON (default: <out>/directory.json)");
  detect->add_option("--results", det_results, "results file (default: <out>/results.jsonl)");
  detect->add_flag("--score", det.score, "score against truth files next to the traces");
  detect->add_option("--jobs", det.jobs, "worker threads")->check(CLI::PositiveNumber);

  hbarena::ReportOptions rep;
  std::string rep_input;
  auto* report = app.add_subcommand("report", "aggregate results into CSV and JSON reports");
  report->add_option("--out", rep.run_dir, "run directory")->required();
  report->add_option("--input", rep_input, "observation records (default: <out>/results.jsonl)");
  report->add_option("--report", rep.reports, "report name, repeatable, or 'all'");
  report->add_flag("--include-zero-bid-auctions", rep.include_zero_bid_auctions,
                   "count auctions without bids in latency statistics");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : hbarena::kExitUsage;
  }

  if (*simulate) {
    if (*seed_opt) sim.seed = seed;
    if (!sim_out.empty()) sim.out = sim_out;
    return hbarena::cmd_simulate(sim, std::cout, std::cerr);
  }
  if (*detect) {
    if (!det_traces.empty()) det.trace_dir = det_traces;
    if (!det_directory.empty()) det.directory = det_directory;
    if (!det_results.empty()) det.results = det_results;
    return hbarena::cmd_detect(det, std::cout, std::cerr);
  }
  if (!rep_input.empty()) rep.input = rep_input;
  return hbarena::cmd_report(rep, std::cout, std::cerr);
}
