#pragma once

// Header-bidding detection over browser-observable traces. Two signals are
// combined: HB library DOM events, and web requests to known demand partners
// that carry HB parameters. The detector never sees ground truth.

#include <set>
#include <string>

#include "hbarena/detection.hpp"
#include "hbarena/domain.hpp"
#include "hbarena/trace.hpp"

namespace hbarena {

struct DetectorConfig {
  std::set<std::string> keywords{"bidder", "hb_partner", "hb_price", "hb_size"};
  std::string prefix = "hb_";

  bool is_hb_param(const std::string& key) const;
};

bool detect_hb(const Trace& t, const PartnerDirectory& d, const DetectorConfig& cfg = {});

/// Throws ContractViolation when `t` carries no HB activity.
Facet classify_facet(const Trace& t, const PartnerDirectory& d, const DetectorConfig& cfg = {});

DetectionResult extract_auction_metadata(const Trace& t, const PartnerDirectory& d, const DetectorConfig& cfg = {});

/// Parses a trace file's text and runs extraction; parse failures become a
/// result with `error` set rather than an exception.
DetectionResult detect_trace_text(std::string_view text, std::string site_id, std::uint32_t round_index,
                                  const PartnerDirectory& d, const DetectorConfig& cfg = {});

}  // namespace hbarena
