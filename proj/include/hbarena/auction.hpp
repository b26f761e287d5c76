#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "hbarena/decimal.hpp"
#include "hbarena/domain.hpp"

namespace hbarena {

enum class Channel { client, ad_server };
std::string_view to_string(Channel c);

struct Bid {
  PartnerId partner_id;
  std::string slot_id;
  Cpm cpm;
  Millis requested_at;
  Millis arrived_at;
  bool late = false;
  Channel channel = Channel::client;

  bool operator==(const Bid&) const = default;
};

struct WinningBid {
  PartnerId partner_id;
  Cpm cpm;
  Channel channel = Channel::client;

  bool operator==(const WinningBid&) const = default;
};

/// One browser-visible request/response exchange with a demand partner.
/// `has_bids` is false for a no-bid response.
struct PartnerExchange {
  PartnerId partner_id;
  Millis requested_at;
  Millis arrived_at;
  bool has_bids = false;
  bool late = false;

  Millis latency() const { return arrived_at - requested_at; }
};

struct SlotOutcome {
  AdSlotSpec slot;
  std::vector<Bid> bids;
  std::optional<WinningBid> winner;
  bool filled = false;
  bool fallback_used = false;
  bool render_failed = false;
};

struct AuctionOutcome {
  std::string site_id;
  std::uint32_t round_index = 0;
  Facet facet = Facet::client_side;
  WrapperPolicy wrapper_policy = WrapperPolicy::wait_timeout;
  /// Client bid exchanges in request order (empty for server_side).
  std::vector<PartnerExchange> exchanges;
  std::vector<SlotOutcome> slots;
  std::optional<PartnerId> ad_server_partner_id;
  Millis first_request_time;
  Millis wrapper_send_time;
  Millis ad_server_response_time;
  Millis total_latency;
  bool winner_notified = false;

  std::size_t late_bid_count() const;
  std::size_t bid_count() const;
};

struct TierAttempt {
  PartnerId partner_id;
  std::optional<Cpm> bid;
  Millis started_at;
  Millis latency;
};

struct WaterfallSlot {
  AdSlotSpec slot;
  std::vector<TierAttempt> tiers_tried;
  std::optional<WinningBid> winner;
  bool fallback_used = false;
  Millis total_latency;
};

/// Slots run their tier chains in parallel; the round's latency is the
/// slowest chain.
struct WaterfallOutcome {
  std::string site_id;
  std::uint32_t round_index = 0;
  std::vector<WaterfallSlot> slots;
  Millis total_latency;
};

struct NoAdsOutcome {
  std::string site_id;
  std::uint32_t round_index = 0;
};

using RoundOutcome = std::variant<AuctionOutcome, WaterfallOutcome, NoAdsOutcome>;

/// Highest on-time bid meeting the floor. Ties go to the earliest arrival,
/// then to the lexicographically smallest partner_id.
std::optional<WinningBid> select_winner(std::span<const Bid> bids, Cpm floor);

/// Time at which the wrapper hands collected bids to the ad server.
Millis compute_send_time(WrapperPolicy policy, std::int64_t timeout_ms, std::span<const Millis> arrivals);

AuctionOutcome run_client_side(const WebsiteScenario& s, const PartnerCatalog& partners, std::uint64_t seed,
                               std::uint32_t round_index = 0);
AuctionOutcome run_server_side(const WebsiteScenario& s, const PartnerCatalog& partners, std::uint64_t seed,
                               std::uint32_t round_index = 0);
AuctionOutcome run_hybrid(const WebsiteScenario& s, const PartnerCatalog& partners, std::uint64_t seed,
                          std::uint32_t round_index = 0);
WaterfallOutcome run_waterfall(const WebsiteScenario& s, const PartnerCatalog& partners, std::uint64_t seed,
                               std::uint32_t round_index = 0);

/// Dispatches on the scenario's facet.
RoundOutcome simulate_round(const WebsiteScenario& s, const PartnerCatalog& partners, std::uint64_t seed,
                            std::uint32_t round_index);

std::string auction_id(std::string_view site_id, std::uint32_t round_index);

}  // namespace hbarena
