#pragma once

// Test-side reference implementations. Each one is written from the rule it
// checks, not from the production code, and favours obviousness over speed.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hbarena/auction.hpp"
#include "hbarena/trace.hpp"

namespace oracle {

using hbarena::Bid;
using hbarena::Cpm;
using hbarena::Millis;

// b beats c: higher price, then earlier arrival, then smaller partner id.
inline bool beats(const Bid& b, const Bid& c) {
  if (b.cpm != c.cpm) return b.cpm > c.cpm;
  if (b.arrived_at != c.arrived_at) return b.arrived_at < c.arrived_at;
  return b.partner_id < c.partner_id;
}

// O(n^2): the eligible bid that no other eligible bid beats.
inline std::optional<hbarena::WinningBid> brute_force_winner(const std::vector<Bid>& bids, Cpm floor) {
  auto eligible = [&](const Bid& b) { return !b.late && b.cpm >= floor; };
  for (const auto& b : bids) {
    if (!eligible(b)) continue;
    bool beaten = false;
    for (const auto& c : bids) {
      if (&c != &b && eligible(c) && beats(c, b)) beaten = true;
    }
    if (!beaten) return hbarena::WinningBid{b.partner_id, b.cpm, b.channel};
  }
  return std::nullopt;
}

inline Millis send_time(hbarena::WrapperPolicy policy, std::int64_t timeout_ms, const std::vector<Millis>& arrivals) {
  if (policy == hbarena::WrapperPolicy::immediate) return Millis{};
  Millis cap = Millis::from_whole(timeout_ms);
  Millis last{};
  for (auto a : arrivals) last = std::max(last, a);
  return std::min(last, cap);
}

struct EventCounts {
  std::map<std::string, std::size_t> dom;
  std::size_t outbound = 0;
  std::size_t inbound = 0;

  bool operator==(const EventCounts&) const = default;
};

inline EventCounts count_events(const hbarena::Trace& t) {
  EventCounts c;
  for (const auto& e : t.events) {
    if (e.kind == hbarena::EventKind::dom_event) ++c.dom[std::string(hbarena::to_string(*e.event_name))];
    if (e.kind == hbarena::EventKind::web_request) ++c.outbound;
    if (e.kind == hbarena::EventKind::web_response) ++c.inbound;
  }
  return c;
}

// Records an ideal emitter must produce for an HB round, enumerated
// independently from the outcome.
inline EventCounts expected_events(const hbarena::AuctionOutcome& o) {
  EventCounts c;
  std::size_t client_bids = 0;
  for (const auto& so : o.slots)
    for (const auto& b : so.bids) client_bids += b.channel == hbarena::Channel::client ? 1 : 0;
  if (o.facet != hbarena::Facet::server_side) {
    c.dom["auctionInit"] = 1;
    c.dom["requestBids"] = 1;
    c.dom["auctionEnd"] = 1;
    if (!o.exchanges.empty()) c.dom["bidRequested"] = o.exchanges.size();
    if (client_bids) c.dom["bidResponse"] = client_bids;
    c.outbound += o.exchanges.size();
    for (const auto& ex : o.exchanges) {
      if (!ex.has_bids) ++c.inbound;
    }
    c.inbound += client_bids;
  }
  c.outbound += 1;
  c.inbound += o.slots.size();
  for (const auto& so : o.slots) {
    if (!so.winner) continue;
    if (so.winner->channel == hbarena::Channel::client) {
      ++c.dom["bidWon"];
      ++c.outbound;
    }
    ++c.dom[so.render_failed ? "adRenderFailed" : "slotRenderEnded"];
  }
  return c;
}

inline bool has_hb_param(const hbarena::Trace& t) {
  for (const auto& e : t.events)
    for (const auto& [k, v] : e.params)
      if (k.rfind("hb_", 0) == 0) return true;
  return false;
}

inline std::size_t count_dom(const hbarena::Trace& t, hbarena::DomEvent name) {
  return static_cast<std::size_t>(std::count_if(t.events.begin(), t.events.end(), [&](const auto& e) {
    return e.kind == hbarena::EventKind::dom_event && e.event_name == name;
  }));
}

inline std::size_t count_kind(const hbarena::Trace& t, hbarena::EventKind k) {
  return static_cast<std::size_t>(
      std::count_if(t.events.begin(), t.events.end(), [&](const auto& e) { return e.kind == k; }));
}

}  // namespace oracle
