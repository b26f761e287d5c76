// Acceptance gate: one PASS/FAIL line per criterion; exits non-zero if any
// criterion fails.
//
//   hbarena_acceptance [--write-golden]
//
// --write-golden regenerates tests/golden/determinism_digests.json from the
// current build instead of comparing against it.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include <nlohmann/json.hpp>

#include "hbarena/analytics.hpp"
#include "hbarena/commands.hpp"
#include "hbarena/corpus.hpp"
#include "hbarena/detector.hpp"
#include "hbarena/digest.hpp"
#include "hbarena/netsim.hpp"
#include "hbarena/scenario.hpp"
#include "oracles/oracles.hpp"
#include "oracles/random_scenarios.hpp"

using namespace hbarena;
namespace fs = std::filesystem;

namespace {

const fs::path kSource = HBARENA_SOURCE_DIR;
bool g_write_golden = false;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

struct Corpus {
  std::vector<WebsiteScenario> sites;
  PartnerCatalog catalog;
  std::vector<SimulatedRound> rounds;
};

Corpus simulate_scenario(const std::string& name, std::optional<std::uint64_t> seed = {}) {
  auto file = load_scenario_file(kSource / "scenarios" / name);
  if (seed) file.master_seed = *seed;
  Corpus c;
  c.sites = expand_sites(file);
  c.catalog = file.catalog();
  c.rounds = simulate_corpus(CorpusSpec{&c.sites, &c.catalog, file.master_seed, file.rounds_per_site}, max_jobs());
  return c;
}

// Goes through the serialized trace text, as the CLI does.
std::vector<DetectionResult> detect(const Corpus& c, const PartnerDirectory& d) {
  std::vector<DetectionResult> out;
  out.reserve(c.rounds.size());
  for (const auto& r : c.rounds) {
    auto res = detect_trace_text(serialize_events(r.trace.events), r.trace.site_id, r.trace.round_index, d);
    res.rank = c.sites[r.site_index].rank;
    out.push_back(std::move(res));
  }
  return out;
}

std::vector<TruthRecord> truths(const Corpus& c) {
  std::vector<TruthRecord> out;
  for (const auto& r : c.rounds) out.push_back(r.truth);
  return out;
}

double median_ms(std::vector<std::int64_t> v) {
  auto s = summarize(std::move(v), Millis::kPlaces);
  return s.value(s.p50);
}

// 1. select_winner against an O(n^2) brute force, both on random bid sets and
// inside full simulated auctions.
Verdict winner_oracle() {
  std::size_t cases = 0, mismatches = 0;
  RngStream r(101, "acceptance", 0, "select");
  for (int trial = 0; trial < 10000; ++trial) {
    std::vector<Bid> bids;
    const auto n = gen::pick(r, 1, 20);
    for (std::size_t i = 0; i < n; ++i) {
      Bid b{"p" + std::to_string(gen::pick(r, 0, 19)), "s",
            Cpm::from_micros(static_cast<std::int64_t>(gen::pick(r, 0, 40)) * 2500), Millis{},
            Millis::from_whole(static_cast<std::int64_t>(gen::pick(r, 1, 30)))};
      b.late = gen::pick(r, 0, 3) == 0;
      bids.push_back(b);
    }
    auto floor = Cpm::from_micros(static_cast<std::int64_t>(gen::pick(r, 0, 40)) * 2500);
    ++cases;
    if (select_winner(bids, floor) != oracle::brute_force_winner(bids, floor)) ++mismatches;
  }
  std::size_t auctions = 0;
  for (std::uint64_t i = 0; i < 10000; ++i) {
    auto c = gen::random_hb_case(1001, i);
    const auto round = simulate_round(c.site, c.catalog, c.seed, 0);
    const auto& o = std::get<AuctionOutcome>(round);
    for (const auto& so : o.slots) {
      ++auctions;
      if (so.winner != oracle::brute_force_winner(so.bids, so.slot.floor_price)) ++mismatches;
    }
  }
  return {mismatches == 0, std::to_string(cases) + " bid sets + " + std::to_string(auctions) +
                               " slot auctions, mismatches=" + std::to_string(mismatches)};
}

// 2. No late winners; late flags recomputed from exchange arrivals and an
// independent send-time rule.
Verdict late_bids_correct() {
  std::size_t rounds = 0, bad = 0, bids = 0;
  for (std::uint64_t i = 0; i < 10000; ++i) {
    auto c = gen::random_hb_case(2002, i);
    const auto round = simulate_round(c.site, c.catalog, c.seed, 0);
    const auto& o = std::get<AuctionOutcome>(round);
    ++rounds;
    std::vector<Millis> arrivals;
    std::map<PartnerId, Millis> arrival_of;
    if (o.facet != Facet::server_side) {
      for (const auto& ex : o.exchanges) {
        arrivals.push_back(ex.arrived_at);
        arrival_of[ex.partner_id] = ex.arrived_at;
      }
    }
    const Millis send = oracle::send_time(c.site.wrapper_policy, c.site.timeout_ms, arrivals);
    bool ok = send == o.wrapper_send_time;
    for (const auto& so : o.slots) {
      for (const auto& b : so.bids) {
        ++bids;
        if (b.channel == Channel::client) {
          auto it = arrival_of.find(b.partner_id);
          ok = ok && it != arrival_of.end() && it->second == b.arrived_at && b.late == (it->second > send);
        } else {
          ok = ok && !b.late;
        }
      }
      if (so.winner) {
        bool on_time = false;
        for (const auto& b : so.bids)
          on_time = on_time || (b.partner_id == so.winner->partner_id && b.cpm == so.winner->cpm && !b.late);
        ok = ok && on_time;
      }
    }
    if (!ok) ++bad;
  }
  return {bad == 0, std::to_string(rounds) + " rounds, " + std::to_string(bids) + " bids, bad rounds=" +
                        std::to_string(bad)};
}

// 3. Detector against sidecar truth on the mixed corpus.
Verdict detector_exact() {
  auto c = simulate_scenario("mixed_corpus.json");
  auto res = detect(c, PartnerDirectory::from_catalog(c.catalog));
  auto score = score_detection(res, truths(c));
  bool pass = res.size() >= 1000 && score.precision() == 1.0 && score.recall() == 1.0 && score.facet_accuracy() >= 0.99;
  return {pass, std::to_string(res.size()) + " sites, precision=" + fmt("%.4f", score.precision()) +
                    " recall=" + fmt("%.4f", score.recall()) + " facet_accuracy=" + fmt("%.4f", score.facet_accuracy())};
}

// 4. Detector-side facet breakdown on the calibrated corpus, using the
// bundled partner directory rather than the scenario's own.
Verdict facet_breakdown_reproduced() {
  auto c = simulate_scenario("calibrated.json");
  auto res = detect(c, load_directory(kSource / "data" / "partners.json"));
  const std::map<std::string, double> want{{"server_side", 0.48}, {"hybrid", 0.347}, {"client_side", 0.173}};
  bool pass = res.size() == 5000;
  std::string detail;
  for (const auto& p : facet_breakdown(res)) {
    double share = static_cast<double>(p.share) / 1e6;
    auto it = want.find(p.group);
    pass = pass && it != want.end() && std::abs(share - it->second) <= 0.02;
    detail += p.group + "=" + fmt("%.4f", share) + " ";
  }
  return {pass, detail + "(target 0.48/0.347/0.173 +-0.02)"};
}

// 5. Median latency by partner count over 10 seeds.
Verdict latency_by_partner_count() {
  int ordered = 0, ratio_ok = 0;
  std::string detail;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto c = simulate_scenario("latency_partner_count.json", seed);
    auto res = detect(c, PartnerDirectory::from_catalog(c.catalog));
    auto stats = latency_stats(res, LatencyGrouping::partner_count);
    std::vector<double> p50;
    for (std::int64_t n = 1; n <= 3; ++n) {
      auto it = std::find_if(stats.begin(), stats.end(), [&](const auto& kv) { return kv.first.order == n; });
      p50.push_back(it == stats.end() ? -1.0 : it->second.value(it->second.p50));
    }
    bool ord = p50[0] > 0 && p50[0] < p50[1] && p50[1] < p50[2];
    ordered += ord;
    ratio_ok += ord && p50[1] >= 2.0 * p50[0];
    if (seed <= 2)
      detail += "seed" + std::to_string(seed) + " p50=" + fmt("%.1f", p50[0]) + "/" + fmt("%.1f", p50[1]) + "/" +
                fmt("%.1f", p50[2]) + " ";
  }
  return {ordered == 10 && ratio_ok >= 9,
          detail + "ordered " + std::to_string(ordered) + "/10, ratio>=2 " + std::to_string(ratio_ok) + "/10"};
}

// 6. Client-side HB median latency over waterfall median, from truth.
Verdict hb_vs_waterfall() {
  int in_range = 0;
  double lo = 1e9, hi = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto c = simulate_scenario("hb_vs_waterfall.json", seed);
    std::vector<std::int64_t> hb, wf;
    for (const auto& r : c.rounds) {
      if (!r.truth.total_latency) continue;
      if (r.truth.facet == Facet::client_side) hb.push_back(r.truth.total_latency->thousandths());
      if (r.truth.facet == Facet::waterfall_only) wf.push_back(r.truth.total_latency->thousandths());
    }
    double ratio = hb.empty() || wf.empty() ? 0.0 : median_ms(hb) / median_ms(wf);
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
    in_range += ratio >= 2.0 && ratio <= 4.0;
  }
  return {in_range == 10, "ratio range [" + fmt("%.3f", lo) + ", " + fmt("%.3f", hi) + "], in [2,4] on " +
                              std::to_string(in_range) + "/10 seeds"};
}

// 7. Median late fraction over auctions with at least one late bid.
Verdict late_fraction_shape() {
  auto c = simulate_scenario("late_bids.json");
  auto res = detect(c, PartnerDirectory::from_catalog(c.catalog));
  auto stats = late_bid_stats(res);
  const auto& s = stats.fraction_summary_with_late;
  double med = s.count ? s.value(s.p50) : -1.0;
  return {s.count > 0 && std::abs(med - 0.5) <= 0.15,
          "auctions with late bids=" + std::to_string(s.count) + " median late fraction=" + fmt("%.4f", med)};
}

// 8. Pinned empirical bid models give exact per-size medians.
Verdict price_table() {
  auto c = simulate_scenario("prices.json");
  auto res = detect(c, PartnerDirectory::from_catalog(c.catalog));
  auto stats = price_stats(res, PriceGrouping::slot_size);
  const std::map<std::string, std::string> want{{"300x250", "0.031"}, {"120x600", "0.096"}, {"300x50", "0.00084"}};
  bool pass = true;
  std::string detail;
  for (const auto& [size, cpm] : want) {
    auto it = std::find_if(stats.begin(), stats.end(), [&](const auto& kv) { return kv.first.label == size; });
    std::string got = it == stats.end() ? "missing" : Cpm::from_micros(it->second.p50).str();
    pass = pass && it != stats.end() && it->second.p50 == Cpm::parse(cpm)->micros();
    detail += size + "=" + got + " ";
  }
  return {pass, detail};
}

std::map<std::string, std::string> digests(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).generic_string()] = sha256_file(e.path());
  return out;
}

std::string group_digest(const std::map<std::string, std::string>& files, const std::string& prefix) {
  std::string acc;
  for (const auto& [path, sha] : files)
    if (path.rfind(prefix, 0) == 0) acc += path + " " + sha + "\n";
  return sha256_hex(acc);
}

// 9. Two full pipeline runs with different job counts are byte-identical and
// match the digests recorded in the repository.
Verdict determinism() {
  const fs::path base = fs::temp_directory_path() / ("hbarena-acceptance-" + std::to_string(::getpid()));
  fs::remove_all(base);
  std::vector<std::map<std::string, std::string>> runs;
  std::ostringstream sink;
  const int jobs[] = {1, std::max(2, max_jobs())};
  for (int j : jobs) {
    fs::path dir = base / ("jobs" + std::to_string(j));
    SimulateOptions so{kSource / "scenarios" / "mixed_corpus.json", std::nullopt, dir, j};
    DetectOptions d;
    d.run_dir = dir;
    d.jobs = j;
    ReportOptions r;
    r.run_dir = dir;
    if (cmd_simulate(so, sink, sink) != kExitOk || cmd_detect(d, sink, sink) != kExitOk ||
        cmd_report(r, sink, sink) != kExitOk) {
      fs::remove_all(base);
      return {false, "pipeline failed: " + sink.str()};
    }
    runs.push_back(digests(dir));
  }
  fs::remove_all(base);
  bool same = runs[0] == runs[1];

  nlohmann::ordered_json now;
  for (const char* g : {"traces/", "truth/", "outcomes.jsonl", "results.jsonl", "reports/", "manifest.json"})
    now[g] = group_digest(runs[0], g);
  const fs::path golden = kSource / "tests" / "golden" / "determinism_digests.json";
  if (g_write_golden) write_text(golden, now.dump(2) + "\n");
  bool golden_ok = fs::exists(golden) && nlohmann::ordered_json::parse(read_text(golden)) == now;
  return {same && golden_ok, std::to_string(runs[0].size()) + " files, runs identical=" + (same ? "yes" : "no") +
                                 ", golden digests match=" + (golden_ok ? "yes" : "no")};
}

// 10. Serialization round-trip and facet fingerprints over every generated
// trace of the scenario corpora.
Verdict trace_fingerprints() {
  std::size_t traces = 0, bad_roundtrip = 0, bad_server = 0, bad_waterfall = 0;
  for (const char* name : {"mixed_corpus.json", "calibrated.json", "hb_vs_waterfall.json", "late_bids.json"}) {
    auto c = simulate_scenario(name);
    for (const auto& r : c.rounds) {
      ++traces;
      auto text = serialize_events(r.trace.events);
      auto back = parse_events(text);
      if (back != r.trace.events || serialize_events(back) != text) ++bad_roundtrip;
      const auto facet = c.sites[r.site_index].facet;
      if (facet == Facet::server_side && oracle::count_dom(r.trace, DomEvent::bidRequested) != 0) ++bad_server;
      if (facet == Facet::waterfall_only &&
          (oracle::count_kind(r.trace, EventKind::dom_event) != 0 || oracle::has_hb_param(r.trace)))
        ++bad_waterfall;
    }
  }
  return {bad_roundtrip + bad_server + bad_waterfall == 0,
          std::to_string(traces) + " traces, round-trip failures=" + std::to_string(bad_roundtrip) +
              " server bidRequested=" + std::to_string(bad_server) + " waterfall dom/hb_=" +
              std::to_string(bad_waterfall)};
}

}  // namespace

int main(int argc, char** argv) {
  for (int i = 1; i < argc; ++i)
    if (std::strcmp(argv[i], "--write-golden") == 0) g_write_golden = true;

  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"winner selection equals brute force", winner_oracle},
      {"late-bid flags and on-time winners", late_bids_correct},
      {"detector exactness on mixed corpus", detector_exact},
      {"facet breakdown within 2pp", facet_breakdown_reproduced},
      {"latency increases with partner count", latency_by_partner_count},
      {"HB vs waterfall median latency ratio", hb_vs_waterfall},
      {"late-fraction median near 0.5", late_fraction_shape},
      {"price medians exact", price_table},
      {"determinism across runs and job counts", determinism},
      {"trace round-trip and fingerprints", trace_fingerprints},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] criterion %zu: %s: %s (%.1fs)\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                v.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !v.pass;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
