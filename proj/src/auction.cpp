#include "hbarena/auction.hpp"

#include <algorithm>
#include <map>

#include "hbarena/netsim.hpp"

namespace hbarena {

std::string_view to_string(Channel c) { return c == Channel::client ? "client" : "ad_server"; }

std::size_t AuctionOutcome::late_bid_count() const {
  std::size_t n = 0;
  for (const auto& s : slots) n += static_cast<std::size_t>(std::count_if(s.bids.begin(), s.bids.end(), [](const Bid& b) { return b.late; }));
  return n;
}

std::size_t AuctionOutcome::bid_count() const {
  std::size_t n = 0;
  for (const auto& s : slots) n += s.bids.size();
  return n;
}

std::string auction_id(std::string_view site_id, std::uint32_t round_index) {
  return std::string(site_id) + "-r" + std::to_string(round_index);
}

std::optional<WinningBid> select_winner(std::span<const Bid> bids, Cpm floor) {
  const Bid* best = nullptr;
  for (const auto& b : bids) {
    if (b.late || b.cpm < floor) continue;
    if (best == nullptr || b.cpm > best->cpm ||
        (b.cpm == best->cpm &&
         (b.arrived_at < best->arrived_at || (b.arrived_at == best->arrived_at && b.partner_id < best->partner_id)))) {
      best = &b;
    }
  }
  if (best == nullptr) return std::nullopt;
  return WinningBid{best->partner_id, best->cpm, best->channel};
}

Millis compute_send_time(WrapperPolicy policy, std::int64_t timeout_ms, std::span<const Millis> arrivals) {
  if (policy == WrapperPolicy::immediate || arrivals.empty()) return Millis{};
  Millis last = *std::max_element(arrivals.begin(), arrivals.end());
  return std::min(last, Millis::from_whole(timeout_ms));
}

namespace {

void require_facet(const WebsiteScenario& s, Facet expected) {
  if (s.facet != expected)
    throw ContractViolation("scenario '" + s.site_id + "' has facet " + std::string(to_string(s.facet)) +
                            ", expected " + std::string(to_string(expected)));
}

std::vector<const DemandPartnerSpec*> resolve_all(const PartnerCatalog& catalog, const std::vector<PartnerId>& ids) {
  std::vector<const DemandPartnerSpec*> out;
  out.reserve(ids.size());
  for (const auto& id : ids) out.push_back(&resolve_partner(catalog, id));
  return out;
}

struct ClientPhase {
  std::vector<PartnerExchange> exchanges;
  std::map<std::string, std::vector<Bid>> bids_by_slot;
  Millis send_time;
};

// Wrapper state machine, driven by the event engine: bid requests go out at
// t=0, responses arrive at their sampled latencies, and the wrapper fires the
// ad-server request once every partner answered, the timeout expired, or
// immediately under the `immediate` policy.
struct WrapperStart {};
struct PartnerResponds {
  std::size_t index;
};
struct WrapperTimeout {};
using WrapperEvent = std::variant<WrapperStart, PartnerResponds, WrapperTimeout>;

ClientPhase run_client_phase(const WebsiteScenario& s, const std::vector<const DemandPartnerSpec*>& partners,
                             std::uint64_t seed, std::uint32_t round_index) {
  ClientPhase phase;
  const std::size_t n = partners.size();
  std::vector<Millis> latency(n);
  std::vector<std::vector<Bid>> offered(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = *partners[i];
    RngStream lat(seed, s.site_id, round_index, "latency/" + p.partner_id);
    latency[i] = sample_latency(p.latency_model, lat);
    for (const auto& slot : s.slots) {
      RngStream bid(seed, s.site_id, round_index, "bid/" + p.partner_id + "/" + slot.slot_id);
      if (auto cpm = sample_bid(p.bid_model_for(slot.size_key()), p.response_probability, bid)) {
        offered[i].push_back(Bid{p.partner_id, slot.slot_id, *cpm, Millis{}, latency[i], false, Channel::client});
      }
    }
  }

  std::optional<Millis> sent;
  std::size_t answered = 0;
  std::vector<Millis> arrived(n);
  auto handler = [&](const ScheduledEvent<WrapperEvent>& ev) {
    std::vector<Timed<WrapperEvent>> next;
    std::visit(
        [&](const auto& e) {
          using T = std::decay_t<decltype(e)>;
          if constexpr (std::is_same_v<T, WrapperStart>) {
            for (std::size_t i = 0; i < n; ++i) next.push_back({ev.fire_at + latency[i], PartnerResponds{i}});
            if (s.wrapper_policy == WrapperPolicy::immediate) {
              sent = ev.fire_at;
            } else {
              next.push_back({Millis::from_whole(s.timeout_ms), WrapperTimeout{}});
            }
          } else if constexpr (std::is_same_v<T, PartnerResponds>) {
            arrived[e.index] = ev.fire_at;
            if (++answered == n && !sent) sent = ev.fire_at;
          } else {
            if (!sent) sent = ev.fire_at;
          }
        },
        ev.payload);
    return next;
  };
  run_sim<WrapperEvent>({{Millis{}, WrapperStart{}}}, handler);
  phase.send_time = sent.value_or(Millis{});

  for (std::size_t i = 0; i < n; ++i) {
    bool late = arrived[i] > phase.send_time;
    phase.exchanges.push_back(
        PartnerExchange{partners[i]->partner_id, Millis{}, arrived[i], !offered[i].empty(), late});
    for (auto& b : offered[i]) {
      b.arrived_at = arrived[i];
      b.late = late;
      phase.bids_by_slot[b.slot_id].push_back(b);
    }
  }
  return phase;
}

void settle_slots(AuctionOutcome& out, const WebsiteScenario& s, std::map<std::string, std::vector<Bid>>& bids_by_slot,
                  std::uint64_t seed, std::uint32_t round_index) {
  for (const auto& slot : s.slots) {
    SlotOutcome so;
    so.slot = slot;
    so.bids = std::move(bids_by_slot[slot.slot_id]);
    so.winner = select_winner(so.bids, slot.floor_price);
    so.filled = so.winner.has_value();
    so.fallback_used = !so.filled;
    if (so.filled && s.render_failure_probability > 0.0) {
      RngStream render(seed, s.site_id, round_index, "render/" + slot.slot_id);
      so.render_failed = render.next_unit() < s.render_failure_probability;
    }
    out.slots.push_back(std::move(so));
  }
}

// Bids the ad server gathers on its own, visible to the browser only through
// the winner it reports.
void add_server_bids(std::map<std::string, std::vector<Bid>>& bids_by_slot, const WebsiteScenario& s,
                     const std::vector<const DemandPartnerSpec*>& backend, Millis at, std::uint64_t seed,
                     std::uint32_t round_index) {
  for (const auto* p : backend) {
    for (const auto& slot : s.slots) {
      RngStream bid(seed, s.site_id, round_index, "server-bid/" + p->partner_id + "/" + slot.slot_id);
      if (auto cpm = sample_bid(p->bid_model_for(slot.size_key()), p->response_probability, bid)) {
        bids_by_slot[slot.slot_id].push_back(Bid{p->partner_id, slot.slot_id, *cpm, at, at, false, Channel::ad_server});
      }
    }
  }
}

Millis sample_ad_server(const WebsiteScenario& s, std::uint64_t seed, std::uint32_t round_index) {
  RngStream r(seed, s.site_id, round_index, "adserver");
  return sample_latency(s.ad_server_latency, r);
}

bool any_client_winner(const AuctionOutcome& o) {
  return std::any_of(o.slots.begin(), o.slots.end(),
                     [](const SlotOutcome& so) { return so.winner && so.winner->channel == Channel::client; });
}

}  // namespace

AuctionOutcome run_client_side(const WebsiteScenario& s, const PartnerCatalog& catalog, std::uint64_t seed,
                               std::uint32_t round_index) {
  require_facet(s, Facet::client_side);
  auto partners = resolve_all(catalog, s.partners);
  if (partners.empty()) throw ConfigError("client_side scenario '" + s.site_id + "' has no partners");

  ClientPhase phase = run_client_phase(s, partners, seed, round_index);
  AuctionOutcome out;
  out.site_id = s.site_id;
  out.round_index = round_index;
  out.facet = s.facet;
  out.wrapper_policy = s.wrapper_policy;
  out.exchanges = std::move(phase.exchanges);
  out.first_request_time = Millis{};
  out.wrapper_send_time = phase.send_time;
  out.ad_server_response_time = phase.send_time + sample_ad_server(s, seed, round_index);
  out.total_latency = out.ad_server_response_time - out.first_request_time;
  settle_slots(out, s, phase.bids_by_slot, seed, round_index);
  out.winner_notified = any_client_winner(out);
  return out;
}

AuctionOutcome run_server_side(const WebsiteScenario& s, const PartnerCatalog& catalog, std::uint64_t seed,
                               std::uint32_t round_index) {
  require_facet(s, Facet::server_side);
  if (!s.ad_server_partner_id) throw ConfigError("server_side scenario '" + s.site_id + "' has no ad_server_partner_id");
  resolve_partner(catalog, *s.ad_server_partner_id);
  auto backend = resolve_all(catalog, s.partners);

  AuctionOutcome out;
  out.site_id = s.site_id;
  out.round_index = round_index;
  out.facet = s.facet;
  out.wrapper_policy = s.wrapper_policy;
  out.ad_server_partner_id = s.ad_server_partner_id;
  out.first_request_time = Millis{};
  out.wrapper_send_time = Millis{};
  out.ad_server_response_time = sample_ad_server(s, seed, round_index);
  out.total_latency = out.ad_server_response_time;

  std::map<std::string, std::vector<Bid>> bids_by_slot;
  add_server_bids(bids_by_slot, s, backend, Millis{}, seed, round_index);
  settle_slots(out, s, bids_by_slot, seed, round_index);
  return out;
}

AuctionOutcome run_hybrid(const WebsiteScenario& s, const PartnerCatalog& catalog, std::uint64_t seed,
                          std::uint32_t round_index) {
  require_facet(s, Facet::hybrid);
  if (!s.ad_server_partner_id) throw ConfigError("hybrid scenario '" + s.site_id + "' has no ad_server_partner_id");
  resolve_partner(catalog, *s.ad_server_partner_id);
  auto partners = resolve_all(catalog, s.partners);
  auto backend = resolve_all(catalog, s.server_partners);
  if (partners.empty()) throw ConfigError("hybrid scenario '" + s.site_id + "' has no partners");

  ClientPhase phase = run_client_phase(s, partners, seed, round_index);
  AuctionOutcome out;
  out.site_id = s.site_id;
  out.round_index = round_index;
  out.facet = s.facet;
  out.wrapper_policy = s.wrapper_policy;
  out.ad_server_partner_id = s.ad_server_partner_id;
  out.exchanges = std::move(phase.exchanges);
  out.first_request_time = Millis{};
  out.wrapper_send_time = phase.send_time;
  out.ad_server_response_time = phase.send_time + sample_ad_server(s, seed, round_index);
  out.total_latency = out.ad_server_response_time - out.first_request_time;
  add_server_bids(phase.bids_by_slot, s, backend, phase.send_time, seed, round_index);
  settle_slots(out, s, phase.bids_by_slot, seed, round_index);
  out.winner_notified = any_client_winner(out);
  return out;
}

WaterfallOutcome run_waterfall(const WebsiteScenario& s, const PartnerCatalog& catalog, std::uint64_t seed,
                               std::uint32_t round_index) {
  require_facet(s, Facet::waterfall_only);
  if (s.partners.empty()) throw ConfigError("waterfall scenario '" + s.site_id + "' has an empty tier list");
  auto tiers = resolve_all(catalog, s.partners);

  WaterfallOutcome out;
  out.site_id = s.site_id;
  out.round_index = round_index;
  for (const auto& slot : s.slots) {
    WaterfallSlot ws;
    ws.slot = slot;
    Millis clock;
    for (const auto* p : tiers) {
      RngStream lat(seed, s.site_id, round_index, "latency/" + p->partner_id + "/" + slot.slot_id);
      RngStream bid(seed, s.site_id, round_index, "bid/" + p->partner_id + "/" + slot.slot_id);
      TierAttempt attempt{p->partner_id, std::nullopt, clock, sample_latency(p->latency_model, lat)};
      attempt.bid = sample_bid(p->bid_model_for(slot.size_key()), p->response_probability, bid);
      clock += attempt.latency;
      bool meets_floor = attempt.bid && *attempt.bid >= slot.floor_price;
      ws.tiers_tried.push_back(attempt);
      if (meets_floor) {
        ws.winner = WinningBid{p->partner_id, *attempt.bid, Channel::ad_server};
        break;
      }
    }
    ws.fallback_used = !ws.winner;
    ws.total_latency = clock;
    out.total_latency = std::max(out.total_latency, clock);
    out.slots.push_back(std::move(ws));
  }
  return out;
}

RoundOutcome simulate_round(const WebsiteScenario& s, const PartnerCatalog& partners, std::uint64_t seed,
                            std::uint32_t round_index) {
  switch (s.facet) {
    case Facet::client_side: return run_client_side(s, partners, seed, round_index);
    case Facet::server_side: return run_server_side(s, partners, seed, round_index);
    case Facet::hybrid: return run_hybrid(s, partners, seed, round_index);
    case Facet::waterfall_only: return run_waterfall(s, partners, seed, round_index);
    case Facet::no_ads: return NoAdsOutcome{s.site_id, round_index};
  }
  throw ContractViolation("unknown facet");
}

}  // namespace hbarena
