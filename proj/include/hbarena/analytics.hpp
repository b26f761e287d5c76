#pragma once

// Aggregations over per-round observation records.
//
// Percentiles use linear interpolation between closest ranks
// (position = p/100 * (n - 1)) and are computed in exact integer arithmetic
// on the fixed-point inputs, rounding half-to-even once at the end.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hbarena/detection.hpp"

namespace hbarena {

struct StatsSummary {
  std::size_t count = 0;
  int places = 0;  // decimal places of the scaled fields
  std::int64_t p5 = 0, p25 = 0, p50 = 0, p75 = 0, p95 = 0, mean = 0;
  std::int64_t min = 0, max = 0;

  double value(std::int64_t scaled) const;
  std::string format(std::int64_t scaled) const;
  bool operator==(const StatsSummary&) const = default;
};

/// Scaled percentile of already sorted data (p in [0, 100]).
std::int64_t percentile_sorted(std::span<const std::int64_t> sorted, int p);
StatsSummary summarize(std::vector<std::int64_t> values, int places);

/// Group label plus a sort key so that numeric groups order numerically.
struct GroupKey {
  std::int64_t order = 0;
  std::string label;
  auto operator<=>(const GroupKey&) const = default;
};

using GroupedStats = std::map<GroupKey, StatsSummary>;

enum class LatencyGrouping { site, partner, partner_count, slot_count, rank_bin };
enum class PriceGrouping { slot_size, facet, partner_popularity_bin };

inline constexpr std::int64_t kRankBinWidth = 500;
inline constexpr std::size_t kPopularityBinWidth = 10;

struct LatencyOptions {
  /// Rounds in which no bid was observed are skipped unless set.
  bool include_zero_bid_rounds = false;
};

/// `partner` groups per-partner response latencies; every other grouping
/// uses the round's total HB latency.
GroupedStats latency_stats(std::span<const DetectionResult> results, LatencyGrouping group_by,
                           const LatencyOptions& options = {});

struct PartnerLateStats {
  PartnerId partner_id;
  std::size_t bids = 0;
  std::size_t late = 0;
  std::int64_t late_pct = 0;  // percent, 6 decimal places
};

struct LateBidStats {
  /// Late/total per auction (6 decimal places), auctions with no bids excluded.
  std::vector<std::int64_t> fractions;
  StatsSummary fraction_summary;
  /// Same, restricted to auctions with at least one late bid.
  StatsSummary fraction_summary_with_late;
  std::vector<PartnerLateStats> per_partner;
};

LateBidStats late_bid_stats(std::span<const DetectionResult> results);

GroupedStats price_stats(std::span<const DetectionResult> results, PriceGrouping group_by);

struct Proportion {
  std::string group;
  std::size_t count = 0;
  std::int64_t share = 0;  // fraction, 6 decimal places
};

/// Shares of client_side / server_side / hybrid among HB sites.
std::vector<Proportion> facet_breakdown(std::span<const DetectionResult> results);

struct PopularityReport {
  std::size_t hb_sites = 0;
  std::vector<Proportion> presence;            // per partner, by presence desc
  std::vector<Proportion> combinations;        // exact partner set per site
  std::vector<Proportion> partners_per_site;   // distribution of set sizes
};

PopularityReport partner_popularity_and_combinations(std::span<const DetectionResult> results);

/// Partners ranked by site presence (desc, then id); 1-based rank.
std::map<PartnerId, std::size_t> partner_popularity_rank(std::span<const DetectionResult> results);

}  // namespace hbarena
