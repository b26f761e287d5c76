#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hbarena/auction.hpp"
#include "hbarena/decimal.hpp"
#include "hbarena/domain.hpp"

namespace hbarena {

enum class EventKind { dom_event, web_request, web_response };
enum class Direction { outbound, inbound };

/// HB library events a content script can observe.
enum class DomEvent {
  auctionInit,
  requestBids,
  bidRequested,
  bidResponse,
  auctionEnd,
  bidWon,
  slotRenderEnded,
  adRenderFailed,
};

inline constexpr std::array<DomEvent, 8> kDomEvents = {
    DomEvent::auctionInit, DomEvent::requestBids, DomEvent::bidRequested,    DomEvent::bidResponse,
    DomEvent::auctionEnd,  DomEvent::bidWon,      DomEvent::slotRenderEnded, DomEvent::adRenderFailed,
};

std::string_view to_string(EventKind k);
std::string_view to_string(Direction d);
std::string_view to_string(DomEvent e);
std::optional<EventKind> parse_event_kind(std::string_view s);
std::optional<Direction> parse_direction(std::string_view s);
std::optional<DomEvent> parse_dom_event(std::string_view s);

using Params = std::map<std::string, std::string>;

struct TraceEvent {
  Millis ts;
  EventKind kind = EventKind::dom_event;
  std::optional<DomEvent> event_name;
  std::optional<std::string> url;
  std::optional<Direction> direction;
  Params params;
  std::optional<std::string> auction_id;
  std::optional<std::string> slot_id;

  bool operator==(const TraceEvent&) const = default;
};

struct Trace {
  std::string site_id;
  std::uint32_t round_index = 0;
  std::vector<TraceEvent> events;

  bool operator==(const Trace&) const = default;
};

/// Ground truth kept beside (never inside) a trace.
struct TruthRecord {
  struct SlotWinner {
    std::string slot_id;
    PartnerId partner_id;
    Cpm cpm;
    bool operator==(const SlotWinner&) const = default;
  };
  std::string site_id;
  std::uint32_t round_index = 0;
  Facet facet = Facet::no_ads;
  std::vector<SlotWinner> winner;
  std::size_t late_bid_count = 0;
  std::optional<Millis> total_latency;

  bool operator==(const TruthRecord&) const = default;
};

class TraceParseError : public std::runtime_error {
 public:
  TraceParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// One JSON object, fixed key order, no trailing newline.
std::string serialize_event(const TraceEvent& e);
/// JSON Lines, one event per line, each line newline-terminated.
std::string serialize_events(const std::vector<TraceEvent>& events);
TraceEvent parse_event(std::string_view line, std::size_t line_no = 1);
std::vector<TraceEvent> parse_events(std::string_view text);

std::string serialize_truth(const TruthRecord& t);
TruthRecord parse_truth(std::string_view line);

/// Host used by a publisher-operated ad server (client-side facet).
inline constexpr std::string_view kPublisherAdServerHost = "ads.publisher.example";
inline constexpr std::string_view kPublisherHost = "publisher.example";
/// Request parameter carrying the wrapper's slot inventory to the ad server.
inline constexpr std::string_view kSlotsParam = "hb_slots";

/// Browser-observable trace for one simulated round.
Trace emit_trace(const RoundOutcome& outcome, const WebsiteScenario& s, const PartnerCatalog& partners);
TruthRecord make_truth(const RoundOutcome& outcome, Facet facet);

/// "<site_id>__r<round>" file stem shared by trace and truth files.
std::string trace_stem(std::string_view site_id, std::uint32_t round_index);

}  // namespace hbarena
