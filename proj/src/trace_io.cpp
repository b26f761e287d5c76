#include <algorithm>

#include <nlohmann/json.hpp>

#include "hbarena/trace.hpp"

namespace hbarena {

using nlohmann::json;

std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::dom_event: return "dom_event";
    case EventKind::web_request: return "web_request";
    case EventKind::web_response: return "web_response";
  }
  return "unknown";
}

std::string_view to_string(Direction d) { return d == Direction::outbound ? "outbound" : "inbound"; }

std::string_view to_string(DomEvent e) {
  switch (e) {
    case DomEvent::auctionInit: return "auctionInit";
    case DomEvent::requestBids: return "requestBids";
    case DomEvent::bidRequested: return "bidRequested";
    case DomEvent::bidResponse: return "bidResponse";
    case DomEvent::auctionEnd: return "auctionEnd";
    case DomEvent::bidWon: return "bidWon";
    case DomEvent::slotRenderEnded: return "slotRenderEnded";
    case DomEvent::adRenderFailed: return "adRenderFailed";
  }
  return "unknown";
}

std::optional<EventKind> parse_event_kind(std::string_view s) {
  for (auto k : {EventKind::dom_event, EventKind::web_request, EventKind::web_response}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

std::optional<Direction> parse_direction(std::string_view s) {
  if (s == "outbound") return Direction::outbound;
  if (s == "inbound") return Direction::inbound;
  return std::nullopt;
}

std::optional<DomEvent> parse_dom_event(std::string_view s) {
  for (auto e : kDomEvents) {
    if (to_string(e) == s) return e;
  }
  return std::nullopt;
}

namespace {

std::string quote(std::string_view s) { return json(std::string(s)).dump(); }

Millis number_to_millis(const json& v) {
  if (v.is_number_integer()) return Millis::from_whole(v.get<std::int64_t>());
  return Millis::from_double(v.get<double>());
}

}  // namespace

std::string serialize_event(const TraceEvent& e) {
  std::string out = "{\"ts_ms\":" + e.ts.str() + ",\"kind\":" + quote(to_string(e.kind));
  if (e.event_name) out += ",\"event_name\":" + quote(to_string(*e.event_name));
  if (e.url) out += ",\"url\":" + quote(*e.url);
  if (e.direction) out += ",\"direction\":" + quote(to_string(*e.direction));
  if (!e.params.empty()) {
    out += ",\"params\":{";
    bool first = true;
    for (const auto& [k, v] : e.params) {
      if (!first) out += ',';
      first = false;
      out += quote(k) + ':' + quote(v);
    }
    out += '}';
  }
  if (e.auction_id) out += ",\"auction_id\":" + quote(*e.auction_id);
  if (e.slot_id) out += ",\"slot_id\":" + quote(*e.slot_id);
  out += '}';
  return out;
}

std::string serialize_events(const std::vector<TraceEvent>& events) {
  std::string out;
  for (const auto& e : events) {
    out += serialize_event(e);
    out += '\n';
  }
  return out;
}

TraceEvent parse_event(std::string_view line, std::size_t line_no) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& err) {
    throw TraceParseError(line_no, std::string("malformed JSON: ") + err.what());
  }
  if (!j.is_object()) throw TraceParseError(line_no, "record is not a JSON object");

  static const std::array<std::string_view, 8> allowed = {"ts_ms", "kind",   "event_name", "url",
                                                          "direction", "params", "auction_id", "slot_id"};
  for (const auto& item : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end())
      throw TraceParseError(line_no, "unexpected key '" + item.key() + "'");
  }
  auto need_string = [&](const char* key) -> std::string {
    const auto& v = j.at(key);
    if (!v.is_string()) throw TraceParseError(line_no, std::string(key) + " must be a string");
    return v.get<std::string>();
  };

  TraceEvent e;
  if (!j.contains("ts_ms") || !j["ts_ms"].is_number()) throw TraceParseError(line_no, "ts_ms missing or not a number");
  e.ts = number_to_millis(j["ts_ms"]);
  if (e.ts < Millis{}) throw TraceParseError(line_no, "ts_ms negative");
  if (!j.contains("kind")) throw TraceParseError(line_no, "kind missing");
  auto kind = parse_event_kind(need_string("kind"));
  if (!kind) throw TraceParseError(line_no, "unknown kind");
  e.kind = *kind;

  if (j.contains("event_name")) {
    auto name = parse_dom_event(need_string("event_name"));
    if (!name) throw TraceParseError(line_no, "event_name outside the HB taxonomy");
    e.event_name = name;
  }
  if (j.contains("url")) e.url = need_string("url");
  if (j.contains("direction")) {
    auto d = parse_direction(need_string("direction"));
    if (!d) throw TraceParseError(line_no, "unknown direction");
    e.direction = d;
  }
  if (j.contains("params")) {
    const auto& p = j["params"];
    if (!p.is_object()) throw TraceParseError(line_no, "params must be an object");
    for (const auto& item : p.items()) {
      if (!item.value().is_string()) throw TraceParseError(line_no, "param '" + item.key() + "' is not a string");
      e.params.emplace(item.key(), item.value().get<std::string>());
    }
  }
  if (j.contains("auction_id")) e.auction_id = need_string("auction_id");
  if (j.contains("slot_id")) e.slot_id = need_string("slot_id");

  if (e.kind == EventKind::dom_event && !e.event_name) throw TraceParseError(line_no, "dom_event without event_name");
  if (e.kind != EventKind::dom_event && (!e.url || !e.direction))
    throw TraceParseError(line_no, "web record without url or direction");
  return e;
}

std::vector<TraceEvent> parse_events(std::string_view text) {
  std::vector<TraceEvent> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    ++line_no;
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    out.push_back(parse_event(line, line_no));
  }
  return out;
}

std::string serialize_truth(const TruthRecord& t) {
  std::string out = "{\"site_id\":" + quote(t.site_id) + ",\"round_index\":" + std::to_string(t.round_index) +
                    ",\"facet\":" + quote(to_string(t.facet)) + ",\"winner\":[";
  for (std::size_t i = 0; i < t.winner.size(); ++i) {
    const auto& w = t.winner[i];
    if (i) out += ',';
    out += "{\"slot_id\":" + quote(w.slot_id) + ",\"partner_id\":" + quote(w.partner_id) + ",\"cpm\":" + w.cpm.str() + "}";
  }
  out += "],\"late_bid_count\":" + std::to_string(t.late_bid_count) + ",\"total_latency_ms\":" +
         (t.total_latency ? t.total_latency->str() : std::string("null")) + "}";
  return out;
}

TruthRecord parse_truth(std::string_view line) {
  json j = json::parse(line);
  TruthRecord t;
  t.site_id = j.at("site_id").get<std::string>();
  t.round_index = j.at("round_index").get<std::uint32_t>();
  auto facet = parse_facet(j.at("facet").get<std::string>());
  if (!facet) throw std::runtime_error("truth record has unknown facet");
  t.facet = *facet;
  for (const auto& w : j.at("winner")) {
    auto cpm = w.at("cpm").is_number_integer() ? Cpm::from_micros(w.at("cpm").get<std::int64_t>() * Cpm::kScale)
                                               : Cpm::from_double(w.at("cpm").get<double>());
    t.winner.push_back({w.at("slot_id").get<std::string>(), w.at("partner_id").get<std::string>(), cpm});
  }
  t.late_bid_count = j.at("late_bid_count").get<std::size_t>();
  if (!j.at("total_latency_ms").is_null()) t.total_latency = number_to_millis(j.at("total_latency_ms"));
  return t;
}

std::string trace_stem(std::string_view site_id, std::uint32_t round_index) {
  return std::string(site_id) + "__r" + std::to_string(round_index);
}

}  // namespace hbarena
