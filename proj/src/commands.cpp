#include "hbarena/commands.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <system_error>

#include <nlohmann/json.hpp>

#include "hbarena/corpus.hpp"
#include "hbarena/digest.hpp"
#include "hbarena/report.hpp"
#include "hbarena/scenario.hpp"

#ifndef HBARENA_VERSION
#define HBARENA_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;

namespace hbarena {

const char* tool_version() { return HBARENA_VERSION; }

void write_text(const fs::path& path, std::string_view text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!f) throw std::runtime_error("write failed for " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<DetectionResult> read_results(const fs::path& path) {
  std::vector<DetectionResult> out;
  std::istringstream in(read_text(path));
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(parse_result(line));
  }
  return out;
}

namespace {

std::optional<std::uint64_t> env_seed() {
  const char* v = std::getenv(kSeedEnvVar);
  if (v == nullptr || *v == '\0') return std::nullopt;
  std::uint64_t seed = 0;
  std::string_view text(v);
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), seed);
  if (ec != std::errc() || end != text.data() + text.size())
    throw ConfigError(std::string(kSeedEnvVar) + " is not an unsigned 64-bit integer: '" + std::string(text) + "'");
  return seed;
}

void clear_jsonl(const fs::path& dir) {
  if (!fs::exists(dir)) return;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl") fs::remove(entry.path());
  }
}

// "<site>__r<round>" -> (site, round)
std::optional<std::pair<std::string, std::uint32_t>> parse_stem(const std::string& stem) {
  auto pos = stem.rfind("__r");
  if (pos == std::string::npos) return std::nullopt;
  try {
    std::size_t used = 0;
    auto round = std::stoul(stem.substr(pos + 3), &used);
    if (used != stem.size() - pos - 3) return std::nullopt;
    return std::make_pair(stem.substr(0, pos), static_cast<std::uint32_t>(round));
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

void print_violations(const std::vector<Violation>& v, std::ostream& err) {
  for (const auto& x : v) {
    err << (x.is_error() ? "error: " : "warning: ") << x.field << ": " << x.message << '\n';
  }
}

}  // namespace

int cmd_simulate(const SimulateOptions& opts, std::ostream& out, std::ostream& err) {
  ScenarioFile file;
  std::vector<WebsiteScenario> sites;
  try {
    file = load_scenario_file(opts.scenario);
    sites = expand_sites(file);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  auto violations = validate_scenario_file(file, sites);
  if (has_errors(violations)) {
    print_violations(violations, err);
    return kExitUsage;
  }
  std::size_t warnings = static_cast<std::size_t>(
      std::count_if(violations.begin(), violations.end(), [](const Violation& v) { return !v.is_error(); }));
  if (warnings > 0) err << "warning: " << warnings << " scenario warning(s)\n";

  try {
    if (opts.seed) {
      file.master_seed = *opts.seed;
    } else if (!file.master_seed_given) {
      if (auto s = env_seed()) file.master_seed = *s;
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  const fs::path run_dir = opts.out.value_or(fs::path(file.output_dir));
  const PartnerCatalog catalog = file.catalog();

  try {
    std::error_code ec;
    fs::create_directories(run_dir / "traces", ec);
    fs::create_directories(run_dir / "truth", ec);
    if (ec || !fs::is_directory(run_dir / "traces")) {
      err << "error: cannot create output directory " << run_dir << '\n';
      return kExitRuntime;
    }
    clear_jsonl(run_dir / "traces");
    clear_jsonl(run_dir / "truth");

    CorpusSpec spec{&sites, &catalog, file.master_seed, file.rounds_per_site};
    std::vector<SimulatedRound> rounds = simulate_corpus(spec, opts.jobs);

    std::vector<fs::path> written(rounds.size() * 2);
    std::exception_ptr failure;
    const auto total = static_cast<std::int64_t>(rounds.size());
#pragma omp parallel for schedule(dynamic, 16) num_threads(opts.jobs > 0 ? opts.jobs : 1)
    for (std::int64_t k = 0; k < total; ++k) {
      const auto& r = rounds[static_cast<std::size_t>(k)];
      const auto stem = trace_stem(r.trace.site_id, r.trace.round_index);
      try {
        auto trace_rel = fs::path("traces") / (stem + ".jsonl");
        auto truth_rel = fs::path("truth") / (stem + ".truth.jsonl");
        write_text(run_dir / trace_rel, serialize_events(r.trace.events));
        write_text(run_dir / truth_rel, serialize_truth(r.truth) + "\n");
        written[static_cast<std::size_t>(2 * k)] = trace_rel;
        written[static_cast<std::size_t>(2 * k + 1)] = truth_rel;
      } catch (...) {
#pragma omp critical(hbarena_write_failure)
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);

    std::vector<const SimulatedRound*> ordered;
    for (const auto& r : rounds) ordered.push_back(&r);
    std::sort(ordered.begin(), ordered.end(), [](const auto* a, const auto* b) {
      return std::tie(a->observed.site_id, a->observed.round_index) < std::tie(b->observed.site_id, b->observed.round_index);
    });
    std::string outcomes;
    for (const auto* r : ordered) outcomes += serialize_result(r->observed) + "\n";
    write_text(run_dir / "outcomes.jsonl", outcomes);

    std::string site_list;
    std::map<std::string, std::size_t> facet_counts;
    for (const auto& s : sites) {
      site_list += "{\"site_id\":" + nlohmann::json(s.site_id).dump() + ",\"rank\":" + std::to_string(s.rank) + "}\n";
      ++facet_counts[std::string(to_string(s.facet))];
    }
    write_text(run_dir / "sites.jsonl", site_list);
    write_text(run_dir / "directory.json", serialize_directory(PartnerDirectory::from_catalog(catalog)));

    std::vector<fs::path> files = written;
    files.push_back("outcomes.jsonl");
    files.push_back("sites.jsonl");
    files.push_back("directory.json");
    std::sort(files.begin(), files.end());

    nlohmann::ordered_json manifest;
    manifest["tool"] = "hbarena";
    manifest["version"] = tool_version();
    manifest["master_seed"] = file.master_seed;
    manifest["rounds_per_site"] = file.rounds_per_site;
    manifest["site_count"] = sites.size();
    manifest["facet_counts"] = nlohmann::ordered_json::object();
    for (const auto& [facet, n] : facet_counts) manifest["facet_counts"][facet] = n;
    manifest["files"] = nlohmann::ordered_json::array();
    for (const auto& f : files) {
      manifest["files"].push_back({{"path", f.generic_string()}, {"sha256", sha256_file(run_dir / f)}});
    }
    write_text(run_dir / "manifest.json", manifest.dump(2) + "\n");

    out << "simulated " << sites.size() << " site(s) x " << file.rounds_per_site << " round(s) -> " << run_dir.string()
        << '\n';
    for (const auto& [facet, n] : facet_counts) out << "  " << facet << ": " << n << '\n';
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

double DetectionScore::precision() const {
  auto d = true_positive + false_positive;
  return d == 0 ? 1.0 : static_cast<double>(true_positive) / static_cast<double>(d);
}

double DetectionScore::recall() const {
  auto d = true_positive + false_negative;
  return d == 0 ? 1.0 : static_cast<double>(true_positive) / static_cast<double>(d);
}

double DetectionScore::facet_accuracy() const {
  return true_positive == 0 ? 1.0 : static_cast<double>(facet_correct) / static_cast<double>(true_positive);
}

DetectionScore score_detection(const std::vector<DetectionResult>& results, const std::vector<TruthRecord>& truth) {
  std::map<std::pair<std::string, std::uint32_t>, const TruthRecord*> index;
  for (const auto& t : truth) index[{t.site_id, t.round_index}] = &t;
  DetectionScore s;
  for (const auto& r : results) {
    auto it = index.find({r.site_id, r.round_index});
    if (it == index.end()) continue;
    const TruthRecord& t = *it->second;
    ++s.scored;
    bool truth_hb = is_hb(t.facet);
    if (r.is_hb && truth_hb) {
      ++s.true_positive;
      if (r.facet == t.facet) ++s.facet_correct;
    } else if (r.is_hb) {
      ++s.false_positive;
    } else if (truth_hb) {
      ++s.false_negative;
    } else {
      ++s.true_negative;
    }
    if (r.late_bid_count == t.late_bid_count) ++s.late_count_agree;
  }
  return s;
}

int cmd_detect(const DetectOptions& opts, std::ostream& out, std::ostream& err) {
  const fs::path trace_dir = opts.trace_dir.value_or(opts.run_dir / "traces");
  const fs::path directory_path = opts.directory.value_or(opts.run_dir / "directory.json");
  const fs::path results_path = opts.results.value_or(opts.run_dir / "results.jsonl");

  PartnerDirectory directory;
  try {
    if (!fs::exists(directory_path)) {
      err << "error: partner directory not found: " << directory_path.string() << '\n';
      return kExitUsage;
    }
    directory = load_directory(directory_path);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  if (!fs::is_directory(trace_dir)) {
    err << "error: trace directory not found: " << trace_dir.string() << '\n';
    return kExitUsage;
  }

  try {
    struct Input {
      std::string site;
      std::uint32_t round;
      fs::path path;
    };
    std::vector<Input> inputs;
    for (const auto& entry : fs::directory_iterator(trace_dir)) {
      if (!entry.is_regular_file() || entry.path().extension() != ".jsonl") continue;
      auto id = parse_stem(entry.path().stem().string());
      if (!id) {
        err << "warning: skipping " << entry.path().filename().string() << " (name is not <site>__r<round>.jsonl)\n";
        continue;
      }
      inputs.push_back({id->first, id->second, entry.path()});
    }
    std::sort(inputs.begin(), inputs.end(),
              [](const Input& a, const Input& b) { return std::tie(a.site, a.round) < std::tie(b.site, b.round); });

    std::map<std::string, std::int64_t> ranks;
    if (auto sites_path = trace_dir.parent_path() / "sites.jsonl"; fs::exists(sites_path)) {
      std::istringstream in(read_text(sites_path));
      std::string line;
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto j = nlohmann::json::parse(line);
        ranks[j.at("site_id").get<std::string>()] = j.at("rank").get<std::int64_t>();
      }
    }

    std::vector<DetectionResult> results(inputs.size());
    std::exception_ptr failure;
    const auto total = static_cast<std::int64_t>(inputs.size());
#pragma omp parallel for schedule(dynamic, 16) num_threads(opts.jobs > 0 ? opts.jobs : 1)
    for (std::int64_t k = 0; k < total; ++k) {
      const auto& in = inputs[static_cast<std::size_t>(k)];
      try {
        auto r = detect_trace_text(read_text(in.path), in.site, in.round, directory);
        if (auto it = ranks.find(in.site); it != ranks.end()) r.rank = it->second;
        results[static_cast<std::size_t>(k)] = std::move(r);
      } catch (...) {
#pragma omp critical(hbarena_detect_cmd_failure)
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);

    std::string text;
    std::size_t errors = 0;
    std::size_t hb = 0;
    for (const auto& r : results) {
      text += serialize_result(r) + "\n";
      if (r.error) {
        ++errors;
        err << "parse error: " << trace_stem(r.site_id, r.round_index) << ": " << *r.error << '\n';
      }
      if (r.is_hb) ++hb;
    }
    write_text(results_path, text);
    out << "detected HB in " << hb << " of " << results.size() << " trace(s) -> " << results_path.string() << '\n';

    if (opts.score) {
      const fs::path truth_dir = trace_dir.parent_path() / "truth";
      std::vector<TruthRecord> truth;
      for (const auto& in : inputs) {
        auto p = truth_dir / (trace_stem(in.site, in.round) + ".truth.jsonl");
        if (!fs::exists(p)) continue;
        std::istringstream lines(read_text(p));
        std::string line;
        while (std::getline(lines, line)) {
          if (!line.empty()) truth.push_back(parse_truth(line));
        }
      }
      auto s = score_detection(results, truth);
      char buf[256];
      std::snprintf(buf, sizeof buf, "scored=%zu precision=%.6f recall=%.6f facet_accuracy=%.6f late_count_agreement=%zu/%zu\n",
                    s.scored, s.precision(), s.recall(), s.facet_accuracy(), s.late_count_agree, s.scored);
      out << buf;
    }
    return errors > 0 ? kExitDetectErrors : kExitOk;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

int cmd_report(const ReportOptions& opts, std::ostream& out, std::ostream& err) {
  std::vector<std::string> names = opts.reports;
  if (names.empty() || (names.size() == 1 && names.front() == "all")) names = report_names();
  for (const auto& n : names) {
    if (!is_report_name(n)) {
      err << "error: unknown report '" << n << "'; valid reports:";
      for (const auto& v : report_names()) err << ' ' << v;
      err << " all\n";
      return kExitUsage;
    }
  }
  const fs::path input = opts.input.value_or(opts.run_dir / "results.jsonl");
  if (!fs::exists(input)) {
    err << "error: input not found: " << input.string() << '\n';
    return kExitUsage;
  }
  try {
    auto results = read_results(input);
    const fs::path report_dir = opts.run_dir / "reports";
    fs::create_directories(report_dir);
    ReportOptionsCore core;
    core.latency.include_zero_bid_rounds = opts.include_zero_bid_auctions;
    std::vector<ReportTable> tables;
    for (const auto& n : names) {
      tables.push_back(build_report(n, results, core));
      write_text(report_dir / (n + ".csv"), to_csv(tables.back()));
    }
    write_text(report_dir / "report.json", to_json(tables));
    out << "wrote " << tables.size() << " report(s) from " << results.size() << " record(s) -> "
        << report_dir.string() << '\n';
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace hbarena
