#include "hbarena/detection.hpp"

#include <algorithm>
#include <set>

#include <nlohmann/json.hpp>

namespace hbarena {

using nlohmann::json;

std::size_t DetectionResult::bid_count() const {
  std::size_t n = 0;
  for (const auto& a : auctions) n += a.bids.size();
  return n;
}

void canonicalize(DetectionResult& r) {
  std::sort(r.partners.begin(), r.partners.end());
  r.partners.erase(std::unique(r.partners.begin(), r.partners.end()), r.partners.end());
  for (auto& a : r.auctions) std::sort(a.bids.begin(), a.bids.end());
  std::sort(r.exchanges.begin(), r.exchanges.end());
}

namespace {

std::string quote(std::string_view s) { return json(std::string(s)).dump(); }

Cpm json_cpm(const json& v) {
  if (v.is_number_integer()) return Cpm::from_micros(v.get<std::int64_t>() * Cpm::kScale);
  return Cpm::from_double(v.get<double>());
}

Millis json_millis(const json& v) {
  if (v.is_number_integer()) return Millis::from_whole(v.get<std::int64_t>());
  return Millis::from_double(v.get<double>());
}

}  // namespace

std::string serialize_result(const DetectionResult& r) {
  std::string out = "{\"site_id\":" + quote(r.site_id) + ",\"round_index\":" + std::to_string(r.round_index);
  out += ",\"rank\":" + (r.rank ? std::to_string(*r.rank) : std::string("null"));
  out += std::string(",\"is_hb\":") + (r.is_hb ? "true" : "false");
  out += ",\"facet\":" + (r.facet ? quote(to_string(*r.facet)) : std::string("null"));
  out += ",\"partners\":[";
  for (std::size_t i = 0; i < r.partners.size(); ++i) out += (i ? "," : "") + quote(r.partners[i]);
  out += "],\"auctions\":[";
  for (std::size_t i = 0; i < r.auctions.size(); ++i) {
    const auto& a = r.auctions[i];
    out += std::string(i ? "," : "") + "{\"slot_id\":" + quote(a.slot_id) + ",\"size\":" + quote(a.size) + ",\"bids\":[";
    for (std::size_t k = 0; k < a.bids.size(); ++k) {
      const auto& b = a.bids[k];
      out += std::string(k ? "," : "") + "{\"partner\":" + quote(b.partner_id) + ",\"cpm\":" + b.cpm.str() +
             ",\"late\":" + (b.late ? "true" : "false") + ",\"channel\":" + quote(to_string(b.channel)) + "}";
    }
    out += "],\"winner\":";
    out += a.winner ? "{\"partner\":" + quote(a.winner->partner_id) + ",\"cpm\":" + a.winner->cpm.str() + "}"
                    : std::string("null");
    out += "}";
  }
  out += "],\"exchanges\":[";
  for (std::size_t i = 0; i < r.exchanges.size(); ++i) {
    out += std::string(i ? "," : "") + "{\"partner\":" + quote(r.exchanges[i].partner_id) +
           ",\"latency_ms\":" + r.exchanges[i].latency.str() + "}";
  }
  out += "],\"late_bid_count\":" + std::to_string(r.late_bid_count);
  out += ",\"hb_latency_ms\":" + (r.hb_latency ? r.hb_latency->str() : std::string("null"));
  out += ",\"warnings\":" + std::to_string(r.warnings);
  if (r.error) out += ",\"error\":" + quote(*r.error);
  out += "}";
  return out;
}

DetectionResult parse_result(std::string_view line) {
  json j = json::parse(line);
  DetectionResult r;
  r.site_id = j.at("site_id").get<std::string>();
  r.round_index = j.at("round_index").get<std::uint32_t>();
  if (!j.at("rank").is_null()) r.rank = j.at("rank").get<std::int64_t>();
  r.is_hb = j.at("is_hb").get<bool>();
  if (!j.at("facet").is_null()) {
    r.facet = parse_facet(j.at("facet").get<std::string>());
    if (!r.facet) throw std::runtime_error("result has unknown facet");
  }
  for (const auto& p : j.at("partners")) r.partners.push_back(p.get<std::string>());
  for (const auto& a : j.at("auctions")) {
    ObservedAuction oa;
    oa.slot_id = a.at("slot_id").get<std::string>();
    oa.size = a.at("size").get<std::string>();
    for (const auto& b : a.at("bids")) {
      oa.bids.push_back(ObservedBid{b.at("partner").get<std::string>(), json_cpm(b.at("cpm")), b.at("late").get<bool>(),
                                    b.at("channel").get<std::string>() == "client" ? Channel::client : Channel::ad_server});
    }
    if (!a.at("winner").is_null())
      oa.winner = ObservedWinner{a["winner"].at("partner").get<std::string>(), json_cpm(a["winner"].at("cpm"))};
    r.auctions.push_back(std::move(oa));
  }
  for (const auto& e : j.at("exchanges"))
    r.exchanges.push_back(ObservedExchange{e.at("partner").get<std::string>(), json_millis(e.at("latency_ms"))});
  r.late_bid_count = j.at("late_bid_count").get<std::size_t>();
  if (!j.at("hb_latency_ms").is_null()) r.hb_latency = json_millis(j.at("hb_latency_ms"));
  r.warnings = j.value("warnings", std::size_t{0});
  if (j.contains("error")) r.error = j["error"].get<std::string>();
  return r;
}

DetectionResult observe_outcome(const RoundOutcome& outcome, const WebsiteScenario& s) {
  DetectionResult r;
  r.site_id = s.site_id;
  r.rank = s.rank;
  std::visit([&](const auto& o) { r.round_index = o.round_index; }, outcome);
  const auto* o = std::get_if<AuctionOutcome>(&outcome);
  if (o == nullptr) return r;

  r.is_hb = true;
  r.facet = o->facet;
  for (const auto& ex : o->exchanges) {
    r.partners.push_back(ex.partner_id);
    r.exchanges.push_back({ex.partner_id, ex.latency()});
  }
  if (o->ad_server_partner_id) {
    r.partners.push_back(*o->ad_server_partner_id);
    r.exchanges.push_back({*o->ad_server_partner_id, o->ad_server_response_time - o->wrapper_send_time});
  }
  for (const auto& so : o->slots) {
    ObservedAuction a;
    a.slot_id = so.slot.slot_id;
    a.size = so.slot.size_key();
    for (const auto& b : so.bids) {
      if (b.channel == Channel::client) a.bids.push_back({b.partner_id, b.cpm, b.late, Channel::client});
    }
    if (so.winner) {
      a.winner = ObservedWinner{so.winner->partner_id, so.winner->cpm};
      // The ad server's own bids surface only through the winner it reports.
      bool seen = std::any_of(a.bids.begin(), a.bids.end(), [&](const ObservedBid& b) {
        return b.partner_id == so.winner->partner_id && b.cpm == so.winner->cpm;
      });
      if (!seen) a.bids.push_back({so.winner->partner_id, so.winner->cpm, false, Channel::ad_server});
    }
    r.auctions.push_back(std::move(a));
  }
  r.late_bid_count = o->late_bid_count();
  r.hb_latency = o->total_latency;
  canonicalize(r);
  return r;
}

}  // namespace hbarena
