#include <algorithm>

#include "hbarena/trace.hpp"

namespace hbarena {

namespace {

class Builder {
 public:
  Builder(std::string auction) : auction_(std::move(auction)) {}

  void dom(Millis ts, DomEvent name, Params params = {}, std::optional<std::string> slot = std::nullopt) {
    events_.push_back(TraceEvent{ts, EventKind::dom_event, name, std::nullopt, std::nullopt, std::move(params),
                                 auction_, std::move(slot)});
  }
  void request(Millis ts, std::string url, Params params = {}, std::optional<std::string> slot = std::nullopt) {
    web(ts, EventKind::web_request, Direction::outbound, std::move(url), std::move(params), std::move(slot));
  }
  void response(Millis ts, std::string url, Params params = {}, std::optional<std::string> slot = std::nullopt) {
    web(ts, EventKind::web_response, Direction::inbound, std::move(url), std::move(params), std::move(slot));
  }
  void without_auction_id() { auction_.reset(); }

  std::vector<TraceEvent> finish() {
    std::stable_sort(events_.begin(), events_.end(),
                     [](const TraceEvent& a, const TraceEvent& b) { return a.ts < b.ts; });
    return std::move(events_);
  }

 private:
  void web(Millis ts, EventKind kind, Direction dir, std::string url, Params params, std::optional<std::string> slot) {
    events_.push_back(TraceEvent{ts, kind, std::nullopt, std::move(url), dir, std::move(params), auction_, std::move(slot)});
  }

  std::optional<std::string> auction_;
  std::vector<TraceEvent> events_;
};

std::string bid_url(std::string_view host, std::string_view auction) {
  return "https://" + std::string(host) + "/hb/bid?auction=" + std::string(auction);
}

std::string slot_inventory(const std::vector<AdSlotSpec>& slots) {
  std::string out;
  for (const auto& s : slots) {
    if (!out.empty()) out += ';';
    out += s.slot_id + ':' + s.size_key();
  }
  return out;
}

void emit_hb(Builder& b, const AuctionOutcome& o, const WebsiteScenario& s, const PartnerCatalog& catalog) {
  const std::string auction = auction_id(o.site_id, o.round_index);
  const bool client_phase = o.facet != Facet::server_side;

  if (client_phase) {
    b.dom(o.first_request_time, DomEvent::auctionInit, {{"timeout", std::to_string(s.timeout_ms)}});
    b.dom(o.first_request_time, DomEvent::requestBids);
    for (const auto& ex : o.exchanges) {
      const auto& host = resolve_partner(catalog, ex.partner_id).primary_host();
      b.dom(ex.requested_at, DomEvent::bidRequested, {{"bidder", ex.partner_id}});
      b.request(ex.requested_at, bid_url(host, auction), {{"bidder", ex.partner_id}});
    }
    // Responses in arrival order; simultaneous arrivals keep request order.
    std::vector<const PartnerExchange*> by_arrival;
    for (const auto& ex : o.exchanges) by_arrival.push_back(&ex);
    std::stable_sort(by_arrival.begin(), by_arrival.end(),
                     [](const auto* a, const auto* c) { return a->arrived_at < c->arrived_at; });
    for (const auto* ex : by_arrival) {
      const auto& host = resolve_partner(catalog, ex->partner_id).primary_host();
      if (!ex->has_bids) {
        b.response(ex->arrived_at, bid_url(host, auction), {{"bidder", ex->partner_id}});
        continue;
      }
      for (const auto& so : o.slots) {
        for (const auto& bid : so.bids) {
          if (bid.channel != Channel::client || bid.partner_id != ex->partner_id) continue;
          Params p{{"bidder", bid.partner_id}, {"hb_price", bid.cpm.str()}, {"hb_size", so.slot.size_key()}};
          b.dom(bid.arrived_at, DomEvent::bidResponse, p, so.slot.slot_id);
          b.response(bid.arrived_at, bid_url(host, auction), p, so.slot.slot_id);
        }
      }
    }
    b.dom(o.wrapper_send_time, DomEvent::auctionEnd);
  }

  std::string ad_host(kPublisherAdServerHost);
  if (o.ad_server_partner_id) ad_host = resolve_partner(catalog, *o.ad_server_partner_id).primary_host();
  const std::string ad_url = "https://" + ad_host + "/hb/ads?auction=" + auction;
  b.request(o.wrapper_send_time, ad_url, {{std::string(kSlotsParam), slot_inventory(s.slots)}});
  for (const auto& so : o.slots) {
    Params p{{"hb_size", so.slot.size_key()}};
    if (so.winner) {
      p["hb_partner"] = so.winner->partner_id;
      p["hb_price"] = so.winner->cpm.str();
    }
    b.response(o.ad_server_response_time, ad_url, std::move(p), so.slot.slot_id);
  }

  for (const auto& so : o.slots) {
    if (!so.winner) continue;
    const auto& w = *so.winner;
    if (w.channel == Channel::client) {
      Params p{{"bidder", w.partner_id}, {"hb_price", w.cpm.str()}, {"hb_size", so.slot.size_key()}};
      b.dom(o.ad_server_response_time, DomEvent::bidWon, p, so.slot.slot_id);
      const auto& host = resolve_partner(catalog, w.partner_id).primary_host();
      b.request(o.ad_server_response_time, "https://" + host + "/hb/win?auction=" + auction, p, so.slot.slot_id);
    }
    b.dom(o.ad_server_response_time, so.render_failed ? DomEvent::adRenderFailed : DomEvent::slotRenderEnded,
          {{"hb_size", so.slot.size_key()}}, so.slot.slot_id);
  }
}

void emit_waterfall(Builder& b, const WaterfallOutcome& o, const PartnerCatalog& catalog) {
  b.without_auction_id();
  for (const auto& ws : o.slots) {
    for (std::size_t tier = 0; tier < ws.tiers_tried.size(); ++tier) {
      const auto& t = ws.tiers_tried[tier];
      const auto& host = resolve_partner(catalog, t.partner_id).primary_host();
      const std::string url = "https://" + host + "/rtb/ad?slot=" + ws.slot.slot_id + "&tier=" + std::to_string(tier + 1);
      b.request(t.started_at, url, {{"slot", ws.slot.slot_id}, {"tier", std::to_string(tier + 1)}});
      Params resp;
      if (ws.winner && tier + 1 == ws.tiers_tried.size()) {
        resp["wp"] = ws.winner->cpm.str();
      } else {
        resp["status"] = "nobid";
      }
      b.response(t.started_at + t.latency, url, std::move(resp));
    }
  }
}

}  // namespace

Trace emit_trace(const RoundOutcome& outcome, const WebsiteScenario& s, const PartnerCatalog& catalog) {
  Trace t;
  t.site_id = s.site_id;
  std::visit([&](const auto& o) { t.round_index = o.round_index; }, outcome);
  Builder b(auction_id(s.site_id, t.round_index));
  std::visit(
      [&](const auto& o) {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, AuctionOutcome>) {
          emit_hb(b, o, s, catalog);
        } else if constexpr (std::is_same_v<T, WaterfallOutcome>) {
          emit_waterfall(b, o, catalog);
        } else {
          b.without_auction_id();
          const std::string url = "https://" + std::string(kPublisherHost) + "/";
          b.request(Millis{}, url);
          b.response(Millis{}, url);
        }
      },
      outcome);
  t.events = b.finish();
  return t;
}

TruthRecord make_truth(const RoundOutcome& outcome, Facet facet) {
  TruthRecord t;
  t.facet = facet;
  std::visit(
      [&](const auto& o) {
        using T = std::decay_t<decltype(o)>;
        t.site_id = o.site_id;
        t.round_index = o.round_index;
        if constexpr (std::is_same_v<T, AuctionOutcome>) {
          for (const auto& so : o.slots) {
            if (so.winner) t.winner.push_back({so.slot.slot_id, so.winner->partner_id, so.winner->cpm});
          }
          t.late_bid_count = o.late_bid_count();
          t.total_latency = o.total_latency;
        } else if constexpr (std::is_same_v<T, WaterfallOutcome>) {
          for (const auto& ws : o.slots) {
            if (ws.winner) t.winner.push_back({ws.slot.slot_id, ws.winner->partner_id, ws.winner->cpm});
          }
          t.total_latency = o.total_latency;
        }
      },
      outcome);
  return t;
}

}  // namespace hbarena
