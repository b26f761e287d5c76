#include "hbarena/analytics.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>

namespace hbarena {

namespace {

// Rounds num/den to the nearest integer, ties to even. den > 0.
std::int64_t div_round_even(__int128 num, __int128 den) {
  __int128 q = num / den;
  __int128 r = num % den;
  if (r < 0) {
    r += den;
    q -= 1;
  }
  __int128 twice = 2 * r;
  if (twice > den || (twice == den && (q % 2 != 0))) q += 1;
  return static_cast<std::int64_t>(q);
}

std::int64_t scaled_ratio(std::size_t num, std::size_t den, std::int64_t scale) {
  return div_round_even(static_cast<__int128>(num) * scale, static_cast<__int128>(den));
}

constexpr std::int64_t kShareScale = 1000000;
constexpr int kSharePlaces = 6;

// One record per site for set-valued site properties (first HB round wins).
std::vector<const DetectionResult*> hb_sites(std::span<const DetectionResult> results) {
  std::map<std::string, const DetectionResult*> first;
  for (const auto& r : results) {
    if (!r.is_hb || !r.facet) continue;
    auto it = first.find(r.site_id);
    if (it == first.end() || r.round_index < it->second->round_index) first[r.site_id] = &r;
  }
  std::vector<const DetectionResult*> out;
  for (const auto& [id, r] : first) out.push_back(r);
  return out;
}

std::map<std::string, std::set<PartnerId>> partners_by_site(std::span<const DetectionResult> results) {
  std::map<std::string, std::set<PartnerId>> out;
  for (const auto& r : results) {
    if (!r.is_hb || !r.facet) continue;
    out[r.site_id].insert(r.partners.begin(), r.partners.end());
  }
  return out;
}

std::string rank_bin_label(std::int64_t rank) {
  std::int64_t bin = (rank - 1) / kRankBinWidth;
  return std::to_string(bin * kRankBinWidth + 1) + "-" + std::to_string((bin + 1) * kRankBinWidth);
}

}  // namespace

double StatsSummary::value(std::int64_t scaled) const {
  double scale = 1.0;
  for (int i = 0; i < places; ++i) scale *= 10.0;
  return static_cast<double>(scaled) / scale;
}

std::string StatsSummary::format(std::int64_t scaled) const { return decimal::format_scaled(scaled, places); }

std::int64_t percentile_sorted(std::span<const std::int64_t> sorted, int p) {
  if (sorted.empty()) throw std::invalid_argument("percentile of empty data");
  if (p < 0 || p > 100) throw std::invalid_argument("percentile outside [0, 100]");
  // position = p * (n - 1) / 100, kept as an exact rational.
  const std::int64_t h = static_cast<std::int64_t>(p) * static_cast<std::int64_t>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(h / 100);
  const std::int64_t frac = h % 100;
  if (frac == 0) return sorted[lo];
  const __int128 a = sorted[lo];
  const __int128 b = sorted[lo + 1];
  return div_round_even(a * 100 + (b - a) * frac, 100);
}

StatsSummary summarize(std::vector<std::int64_t> values, int places) {
  StatsSummary s;
  s.places = places;
  s.count = values.size();
  if (values.empty()) return s;
  std::sort(values.begin(), values.end());
  s.min = values.front();
  s.max = values.back();
  s.p5 = percentile_sorted(values, 5);
  s.p25 = percentile_sorted(values, 25);
  s.p50 = percentile_sorted(values, 50);
  s.p75 = percentile_sorted(values, 75);
  s.p95 = percentile_sorted(values, 95);
  __int128 sum = 0;
  for (auto v : values) sum += v;
  s.mean = div_round_even(sum, static_cast<__int128>(values.size()));
  return s;
}

GroupedStats latency_stats(std::span<const DetectionResult> results, LatencyGrouping group_by,
                           const LatencyOptions& options) {
  std::map<GroupKey, std::vector<std::int64_t>> groups;
  for (const auto& r : results) {
    if (!r.is_hb) continue;
    if (!options.include_zero_bid_rounds && r.bid_count() == 0) continue;
    if (group_by == LatencyGrouping::partner) {
      for (const auto& ex : r.exchanges) groups[{0, ex.partner_id}].push_back(ex.latency.thousandths());
      continue;
    }
    if (!r.hb_latency) continue;
    GroupKey key;
    switch (group_by) {
      case LatencyGrouping::site:
        key = {0, r.site_id};
        break;
      case LatencyGrouping::partner_count:
        key = {static_cast<std::int64_t>(r.partners.size()), std::to_string(r.partners.size())};
        break;
      case LatencyGrouping::slot_count:
        key = {static_cast<std::int64_t>(r.auctions.size()), std::to_string(r.auctions.size())};
        break;
      case LatencyGrouping::rank_bin:
        if (!r.rank || *r.rank <= 0) continue;
        key = {(*r.rank - 1) / kRankBinWidth, rank_bin_label(*r.rank)};
        break;
      case LatencyGrouping::partner:
        break;
    }
    groups[key].push_back(r.hb_latency->thousandths());
  }
  GroupedStats out;
  for (auto& [key, values] : groups) out[key] = summarize(std::move(values), Millis::kPlaces);
  return out;
}

LateBidStats late_bid_stats(std::span<const DetectionResult> results) {
  LateBidStats out;
  std::vector<std::int64_t> with_late;
  std::map<PartnerId, PartnerLateStats> partners;
  for (const auto& r : results) {
    for (const auto& a : r.auctions) {
      if (a.bids.empty()) continue;
      std::size_t late = 0;
      for (const auto& b : a.bids) {
        auto& p = partners[b.partner_id];
        p.partner_id = b.partner_id;
        ++p.bids;
        if (b.late) {
          ++p.late;
          ++late;
        }
      }
      auto f = scaled_ratio(late, a.bids.size(), kShareScale);
      out.fractions.push_back(f);
      if (late > 0) with_late.push_back(f);
    }
  }
  out.fraction_summary = summarize(out.fractions, kSharePlaces);
  out.fraction_summary_with_late = summarize(std::move(with_late), kSharePlaces);
  for (auto& [id, p] : partners) {
    p.late_pct = scaled_ratio(p.late * 100, p.bids, kShareScale);
    out.per_partner.push_back(p);
  }
  return out;
}

std::map<PartnerId, std::size_t> partner_popularity_rank(std::span<const DetectionResult> results) {
  std::map<PartnerId, std::size_t> presence;
  for (const auto& [site, set] : partners_by_site(results)) {
    for (const auto& p : set) ++presence[p];
  }
  // Partners seen only as bidders (never in a site's visible set) rank last.
  for (const auto& r : results) {
    for (const auto& a : r.auctions) {
      for (const auto& b : a.bids) presence.try_emplace(b.partner_id, 0);
    }
  }
  std::vector<std::pair<PartnerId, std::size_t>> ranked(presence.begin(), presence.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  std::map<PartnerId, std::size_t> out;
  for (std::size_t i = 0; i < ranked.size(); ++i) out[ranked[i].first] = i + 1;
  return out;
}

GroupedStats price_stats(std::span<const DetectionResult> results, PriceGrouping group_by) {
  std::map<PartnerId, std::size_t> popularity;
  if (group_by == PriceGrouping::partner_popularity_bin) popularity = partner_popularity_rank(results);
  std::map<GroupKey, std::vector<std::int64_t>> groups;
  for (const auto& r : results) {
    for (const auto& a : r.auctions) {
      for (const auto& b : a.bids) {
        GroupKey key;
        switch (group_by) {
          case PriceGrouping::slot_size:
            key = {0, a.size};
            break;
          case PriceGrouping::facet:
            key = {r.facet ? static_cast<std::int64_t>(*r.facet) : -1,
                   r.facet ? std::string(to_string(*r.facet)) : "none"};
            break;
          case PriceGrouping::partner_popularity_bin: {
            auto it = popularity.find(b.partner_id);
            if (it == popularity.end()) {
              key = {std::numeric_limits<std::int64_t>::max(), "unranked"};
              break;
            }
            auto rank = static_cast<std::int64_t>(it->second);
            auto bin = (rank - 1) / static_cast<std::int64_t>(kPopularityBinWidth);
            auto w = static_cast<std::int64_t>(kPopularityBinWidth);
            key = {bin, std::to_string(bin * w + 1) + "-" + std::to_string((bin + 1) * w)};
            break;
          }
        }
        groups[key].push_back(b.cpm.micros());
      }
    }
  }
  GroupedStats out;
  for (auto& [key, values] : groups) out[key] = summarize(std::move(values), Cpm::kPlaces);
  return out;
}

std::vector<Proportion> facet_breakdown(std::span<const DetectionResult> results) {
  auto sites = hb_sites(results);
  if (sites.empty()) return {};
  std::vector<Proportion> out;
  for (auto f : {Facet::client_side, Facet::server_side, Facet::hybrid}) {
    auto n = static_cast<std::size_t>(
        std::count_if(sites.begin(), sites.end(), [f](const DetectionResult* r) { return r->facet == f; }));
    out.push_back({std::string(to_string(f)), n, scaled_ratio(n, sites.size(), kShareScale)});
  }
  return out;
}

PopularityReport partner_popularity_and_combinations(std::span<const DetectionResult> results) {
  PopularityReport rep;
  auto by_site = partners_by_site(results);
  rep.hb_sites = by_site.size();
  if (by_site.empty()) return rep;

  std::map<PartnerId, std::size_t> presence;
  std::map<std::string, std::size_t> combos;
  std::map<std::size_t, std::size_t> sizes;
  for (const auto& [site, set] : by_site) {
    std::string key;
    for (const auto& p : set) {
      ++presence[p];
      if (!key.empty()) key += '+';
      key += p;
    }
    ++combos[key.empty() ? std::string("(none)") : key];
    ++sizes[set.size()];
  }
  auto ranked = [&](const std::map<std::string, std::size_t>& counts) {
    std::vector<Proportion> v;
    for (const auto& [k, n] : counts) v.push_back({k, n, scaled_ratio(n, rep.hb_sites, kShareScale)});
    std::stable_sort(v.begin(), v.end(), [](const Proportion& a, const Proportion& b) { return a.count > b.count; });
    return v;
  };
  rep.presence = ranked(presence);
  rep.combinations = ranked(combos);
  for (const auto& [k, n] : sizes) rep.partners_per_site.push_back({std::to_string(k), n, scaled_ratio(n, rep.hb_sites, kShareScale)});
  return rep;
}

}  // namespace hbarena
