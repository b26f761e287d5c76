#include "hbarena/report.hpp"

#include <algorithm>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace hbarena {

namespace {

const std::vector<std::string> kStatsHeader = {"group", "count", "p5", "p25", "p50", "p75", "p95", "mean"};
const std::vector<std::string> kShareHeader = {"group", "count", "share"};

ReportCell num(std::string s) { return {std::move(s), true}; }
ReportCell text(std::string s) { return {std::move(s), false}; }

std::vector<ReportCell> stats_row(const std::string& group, const StatsSummary& s) {
  return {text(group),         num(std::to_string(s.count)), num(s.format(s.p5)),  num(s.format(s.p25)),
          num(s.format(s.p50)), num(s.format(s.p75)),        num(s.format(s.p95)), num(s.format(s.mean))};
}

ReportTable stats_table(std::string name, const GroupedStats& g) {
  ReportTable t{std::move(name), kStatsHeader, {}};
  for (const auto& [key, s] : g) t.rows.push_back(stats_row(key.label, s));
  return t;
}

ReportTable share_table(std::string name, const std::vector<Proportion>& rows) {
  ReportTable t{std::move(name), kShareHeader, {}};
  for (const auto& p : rows)
    t.rows.push_back({text(p.group), num(std::to_string(p.count)), num(decimal::format_scaled(p.share, 6))});
  return t;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

const std::vector<std::string>& report_names() {
  static const std::vector<std::string> names = {
      "latency_by_site",       "latency_by_partner",    "latency_by_partner_count",
      "latency_by_slot_count", "latency_by_rank_bin",   "late_bid_fraction",
      "late_bids_by_partner",  "prices_by_slot_size",   "prices_by_facet",
      "prices_by_partner_popularity", "facet_breakdown", "partner_popularity",
      "partner_combinations",  "partners_per_site",
  };
  return names;
}

bool is_report_name(const std::string& name) {
  const auto& n = report_names();
  return std::find(n.begin(), n.end(), name) != n.end();
}

ReportTable build_report(const std::string& name, std::span<const DetectionResult> results,
                         const ReportOptionsCore& options) {
  if (name == "latency_by_site") return stats_table(name, latency_stats(results, LatencyGrouping::site, options.latency));
  if (name == "latency_by_partner")
    return stats_table(name, latency_stats(results, LatencyGrouping::partner, options.latency));
  if (name == "latency_by_partner_count")
    return stats_table(name, latency_stats(results, LatencyGrouping::partner_count, options.latency));
  if (name == "latency_by_slot_count")
    return stats_table(name, latency_stats(results, LatencyGrouping::slot_count, options.latency));
  if (name == "latency_by_rank_bin")
    return stats_table(name, latency_stats(results, LatencyGrouping::rank_bin, options.latency));
  if (name == "late_bid_fraction") {
    auto late = late_bid_stats(results);
    ReportTable t{name, kStatsHeader, {}};
    if (late.fraction_summary.count) t.rows.push_back(stats_row("all_auctions", late.fraction_summary));
    if (late.fraction_summary_with_late.count)
      t.rows.push_back(stats_row("auctions_with_late_bids", late.fraction_summary_with_late));
    return t;
  }
  if (name == "late_bids_by_partner") {
    ReportTable t{name, {"group", "bids", "late", "late_pct"}, {}};
    for (const auto& p : late_bid_stats(results).per_partner) {
      t.rows.push_back({text(p.partner_id), num(std::to_string(p.bids)), num(std::to_string(p.late)),
                        num(decimal::format_scaled(p.late_pct, 6))});
    }
    return t;
  }
  if (name == "prices_by_slot_size") return stats_table(name, price_stats(results, PriceGrouping::slot_size));
  if (name == "prices_by_facet") return stats_table(name, price_stats(results, PriceGrouping::facet));
  if (name == "prices_by_partner_popularity")
    return stats_table(name, price_stats(results, PriceGrouping::partner_popularity_bin));
  if (name == "facet_breakdown") return share_table(name, facet_breakdown(results));
  if (name == "partner_popularity") return share_table(name, partner_popularity_and_combinations(results).presence);
  if (name == "partner_combinations")
    return share_table(name, partner_popularity_and_combinations(results).combinations);
  if (name == "partners_per_site")
    return share_table(name, partner_popularity_and_combinations(results).partners_per_site);
  throw std::invalid_argument("unknown report '" + name + "'");
}

std::string to_csv(const ReportTable& t) {
  std::string out;
  for (std::size_t i = 0; i < t.header.size(); ++i) out += (i ? "," : "") + csv_field(t.header[i]);
  out += '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + csv_field(row[i].text);
    out += '\n';
  }
  return out;
}

std::string to_json(const std::vector<ReportTable>& tables) {
  // Hand-assembled so numeric cells keep their exact decimal text.
  auto quote = [](const std::string& s) { return nlohmann::json(s).dump(); };
  std::string out = "{";
  for (std::size_t k = 0; k < tables.size(); ++k) {
    const auto& t = tables[k];
    out += (k ? ",\n" : "\n") + std::string(" ") + quote(t.name) + ": [";
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      out += r ? ",{" : "{";
      for (std::size_t c = 0; c < t.header.size(); ++c) {
        const auto& cell = t.rows[r][c];
        out += (c ? "," : "") + quote(t.header[c]) + ":" + (cell.numeric ? cell.text : quote(cell.text));
      }
      out += "}";
    }
    out += "]";
  }
  out += "\n}\n";
  return out;
}

}  // namespace hbarena
