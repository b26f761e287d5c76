#pragma once

// Per-round observation record. The detector produces one from a trace; the
// simulator produces the same shape from ground truth, so analytics run
// unchanged on either side.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hbarena/auction.hpp"
#include "hbarena/decimal.hpp"
#include "hbarena/domain.hpp"

namespace hbarena {

struct ObservedBid {
  PartnerId partner_id;
  Cpm cpm;
  bool late = false;
  Channel channel = Channel::client;

  auto operator<=>(const ObservedBid&) const = default;
};

struct ObservedWinner {
  PartnerId partner_id;
  Cpm cpm;

  bool operator==(const ObservedWinner&) const = default;
};

/// One auction per ad slot.
struct ObservedAuction {
  std::string slot_id;
  std::string size;
  std::vector<ObservedBid> bids;
  std::optional<ObservedWinner> winner;

  bool operator==(const ObservedAuction&) const = default;
};

struct ObservedExchange {
  PartnerId partner_id;
  Millis latency;

  auto operator<=>(const ObservedExchange&) const = default;
};

struct DetectionResult {
  std::string site_id;
  std::uint32_t round_index = 0;
  std::optional<std::int64_t> rank;
  bool is_hb = false;
  std::optional<Facet> facet;
  std::vector<PartnerId> partners;
  std::vector<ObservedAuction> auctions;
  std::vector<ObservedExchange> exchanges;
  std::size_t late_bid_count = 0;
  std::optional<Millis> hb_latency;
  std::size_t warnings = 0;
  std::optional<std::string> error;

  std::size_t bid_count() const;
  bool operator==(const DetectionResult&) const = default;
};

/// Sorts the set-like members into canonical order.
void canonicalize(DetectionResult& r);

std::string serialize_result(const DetectionResult& r);
DetectionResult parse_result(std::string_view line);

/// What an ideal browser-side observer would record for this round.
DetectionResult observe_outcome(const RoundOutcome& outcome, const WebsiteScenario& s);

}  // namespace hbarena
