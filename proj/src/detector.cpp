#include "hbarena/detector.hpp"

#include <algorithm>
#include <map>

namespace hbarena {

bool DetectorConfig::is_hb_param(const std::string& key) const {
  return keywords.count(key) > 0 || (!prefix.empty() && key.rfind(prefix, 0) == 0);
}

namespace {

bool is_web(const TraceEvent& e) { return e.kind != EventKind::dom_event && e.url.has_value(); }

bool has_hb_params(const TraceEvent& e, const DetectorConfig& cfg) {
  return std::any_of(e.params.begin(), e.params.end(), [&](const auto& kv) { return cfg.is_hb_param(kv.first); });
}

bool has_prefixed_param(const TraceEvent& e, const DetectorConfig& cfg) {
  return !cfg.prefix.empty() && std::any_of(e.params.begin(), e.params.end(),
                                            [&](const auto& kv) { return kv.first.rfind(cfg.prefix, 0) == 0; });
}

bool is_dom(const TraceEvent& e, DomEvent name) { return e.kind == EventKind::dom_event && e.event_name == name; }

std::optional<std::string> param(const TraceEvent& e, const std::string& key) {
  auto it = e.params.find(key);
  if (it == e.params.end()) return std::nullopt;
  return it->second;
}

PartnerId partner_for_host(const std::string& host, const PartnerDirectory& d) {
  if (auto p = lookup_partner(host, d)) return *p;
  return "unknown:" + host;
}

bool is_ad_server_request(const TraceEvent& e) {
  return e.kind == EventKind::web_request && e.direction == Direction::outbound &&
         e.params.count(std::string(kSlotsParam)) > 0;
}

// "s1:300x250;s2:728x90" -> ordered (slot, size) pairs.
std::vector<std::pair<std::string, std::string>> parse_inventory(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::size_t pos = 0;
  while (pos <= text.size() && !text.empty()) {
    auto end = text.find(';', pos);
    auto item = text.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
    auto colon = item.rfind(':');
    if (colon != std::string::npos) out.emplace_back(item.substr(0, colon), item.substr(colon + 1));
    if (end == std::string::npos) break;
    pos = end + 1;
  }
  return out;
}

}  // namespace

bool detect_hb(const Trace& t, const PartnerDirectory& d, const DetectorConfig& cfg) {
  for (const auto& e : t.events) {
    if (e.kind == EventKind::dom_event) return true;
    if (!is_web(e) || !has_hb_params(e, cfg)) continue;
    if (lookup_partner(url_host(*e.url), d) || has_prefixed_param(e, cfg)) return true;
  }
  return false;
}

Facet classify_facet(const Trace& t, const PartnerDirectory& d, const DetectorConfig& cfg) {
  if (!detect_hb(t, d, cfg)) throw ContractViolation("classify_facet called on a trace without HB activity");

  std::set<std::string> client_bidders;
  bool client_phase = false;
  for (const auto& e : t.events) {
    if (is_dom(e, DomEvent::bidRequested) || is_dom(e, DomEvent::bidResponse)) {
      client_phase = true;
      if (auto b = param(e, "bidder")) client_bidders.insert(*b);
    }
  }
  if (!client_phase) return Facet::server_side;

  std::set<std::string> ad_urls;
  for (const auto& e : t.events) {
    if (!is_ad_server_request(e)) continue;
    ad_urls.insert(*e.url);
    // A listed demand partner acting as the ad server runs its own auction.
    if (lookup_partner(url_host(*e.url), d)) return Facet::hybrid;
  }
  for (const auto& e : t.events) {
    if (e.kind != EventKind::web_response || !e.url || ad_urls.count(*e.url) == 0) continue;
    if (auto winner = param(e, "hb_partner"); winner && client_bidders.count(*winner) == 0) return Facet::hybrid;
  }
  return Facet::client_side;
}

DetectionResult extract_auction_metadata(const Trace& t, const PartnerDirectory& d, const DetectorConfig& cfg) {
  DetectionResult r;
  r.site_id = t.site_id;
  r.round_index = t.round_index;
  r.is_hb = detect_hb(t, d, cfg);
  if (!r.is_hb) return r;
  r.facet = classify_facet(t, d, cfg);

  std::optional<Millis> auction_end;
  std::set<std::string> ad_urls;
  std::vector<std::pair<std::string, std::string>> inventory;
  for (const auto& e : t.events) {
    if (!auction_end && is_dom(e, DomEvent::auctionEnd)) auction_end = e.ts;
    if (is_ad_server_request(e)) {
      ad_urls.insert(*e.url);
      if (inventory.empty()) inventory = parse_inventory(e.params.at(std::string(kSlotsParam)));
    }
  }

  std::map<std::string, ObservedAuction> by_slot;
  std::vector<std::string> slot_order;
  auto auction_for = [&](const std::string& slot, const std::string& size) -> ObservedAuction& {
    auto [it, inserted] = by_slot.try_emplace(slot);
    if (inserted) {
      it->second.slot_id = slot;
      it->second.size = size;
      slot_order.push_back(slot);
    }
    if (it->second.size.empty()) it->second.size = size;
    return it->second;
  };
  for (const auto& [slot, size] : inventory) auction_for(slot, size);

  std::map<std::string, Millis> request_time;  // url -> first outbound time
  std::set<std::string> answered;
  std::optional<Millis> first_request;
  std::optional<Millis> ad_response;
  std::set<PartnerId> partners;
  std::map<std::string, ObservedWinner> reported_winner;

  for (const auto& e : t.events) {
    if (!is_web(e)) continue;
    const std::string host = url_host(*e.url);
    const bool ad_exchange = ad_urls.count(*e.url) > 0;
    if (e.kind == EventKind::web_request) {
      if (!has_hb_params(e, cfg)) continue;
      if (!first_request || e.ts < *first_request) first_request = e.ts;
      request_time.try_emplace(*e.url, e.ts);
      if (ad_exchange) {
        // An unlisted ad server is the publisher's own, not a demand partner.
        if (auto p = lookup_partner(host, d)) partners.insert(*p);
      } else {
        partners.insert(partner_for_host(host, d));
      }
      continue;
    }

    if (ad_exchange) {
      if (!ad_response || e.ts > *ad_response) ad_response = e.ts;
      auto p = lookup_partner(host, d);
      if (p && answered.insert(*e.url).second && request_time.count(*e.url))
        r.exchanges.push_back({*p, e.ts - request_time[*e.url]});
      auto winner = param(e, "hb_partner");
      auto price_text = param(e, "hb_price");
      if (winner && price_text && e.slot_id) {
        if (auto price = Cpm::parse(*price_text)) {
          reported_winner[*e.slot_id] = ObservedWinner{*winner, *price};
          auction_for(*e.slot_id, param(e, "hb_size").value_or(""));
        } else {
          ++r.warnings;
        }
      }
      continue;
    }

    if (!has_hb_params(e, cfg) || request_time.count(*e.url) == 0) continue;
    const PartnerId partner = partner_for_host(host, d);
    if (answered.insert(*e.url).second) r.exchanges.push_back({partner, e.ts - request_time[*e.url]});
    auto price_text = param(e, "hb_price");
    if (!price_text) continue;
    auto price = Cpm::parse(*price_text);
    if (!price || *price < Cpm{}) {
      ++r.warnings;
      continue;
    }
    std::string slot = e.slot_id.value_or("");
    bool late = auction_end && e.ts > *auction_end;
    auction_for(slot, param(e, "hb_size").value_or("")).bids.push_back({partner, *price, late, Channel::client});
  }

  // Fall back to bidWon when the ad server's response carried no winner.
  for (const auto& e : t.events) {
    if (!is_dom(e, DomEvent::bidWon) || !e.slot_id || reported_winner.count(*e.slot_id)) continue;
    auto bidder = param(e, "bidder");
    auto price = param(e, "hb_price") ? Cpm::parse(*param(e, "hb_price")) : std::nullopt;
    if (bidder && price) reported_winner[*e.slot_id] = ObservedWinner{*bidder, *price};
  }

  for (const auto& slot : slot_order) {
    auto& a = by_slot[slot];
    if (auto it = reported_winner.find(slot); it != reported_winner.end()) {
      a.winner = it->second;
      bool seen = std::any_of(a.bids.begin(), a.bids.end(), [&](const ObservedBid& b) {
        return b.partner_id == it->second.partner_id && b.cpm == it->second.cpm;
      });
      if (!seen) a.bids.push_back({it->second.partner_id, it->second.cpm, false, Channel::ad_server});
    }
    for (const auto& b : a.bids) r.late_bid_count += b.late ? 1 : 0;
    r.auctions.push_back(std::move(a));
  }
  r.partners.assign(partners.begin(), partners.end());
  if (first_request && ad_response) r.hb_latency = *ad_response - *first_request;
  canonicalize(r);
  return r;
}

DetectionResult detect_trace_text(std::string_view text, std::string site_id, std::uint32_t round_index,
                                  const PartnerDirectory& d, const DetectorConfig& cfg) {
  Trace t;
  t.site_id = std::move(site_id);
  t.round_index = round_index;
  try {
    t.events = parse_events(text);
  } catch (const TraceParseError& err) {
    DetectionResult r;
    r.site_id = t.site_id;
    r.round_index = round_index;
    r.error = err.what();
    return r;
  }
  return extract_auction_metadata(t, d, cfg);
}

}  // namespace hbarena
