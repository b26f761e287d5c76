#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "../oracles/oracles.hpp"
#include "../oracles/random_scenarios.hpp"
#include "fixtures.hpp"
#include "hbarena/trace.hpp"

using namespace hbarena;

namespace {

std::vector<std::string> names(const Trace& t) {
  std::vector<std::string> out;
  for (const auto& e : t.events)
    if (e.kind == EventKind::dom_event) out.push_back(std::string(to_string(*e.event_name)));
  return out;
}

Trace fixture_trace(WrapperPolicy policy = WrapperPolicy::wait_timeout) {
  auto c = fx::two_bidders();
  auto s = fx::site(Facet::client_side, {"A", "B"});
  s.wrapper_policy = policy;
  return emit_trace(run_client_side(s, c, 1), s, c);
}

std::string read(const std::string& rel) {
  std::ifstream in(std::string(HBARENA_SOURCE_DIR) + "/" + rel, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(EmitTrace, ClientSideSequence) {
  auto t = fixture_trace();
  auto n = names(t);
  ASSERT_GE(n.size(), 6u);
  EXPECT_EQ(std::vector<std::string>(n.begin(), n.begin() + 4),
            (std::vector<std::string>{"auctionInit", "requestBids", "bidRequested", "bidRequested"}));
  EXPECT_EQ(std::vector<std::string>(n.end() - 2, n.end()), (std::vector<std::string>{"bidWon", "slotRenderEnded"}));
  for (std::size_t i = 1; i < t.events.size(); ++i) EXPECT_LE(t.events[i - 1].ts, t.events[i].ts);
}

TEST(EmitTrace, ClientSideEventCount) {
  // 2 partners, 2 bids, 1 filled slot, counted by hand.
  auto t = fixture_trace();
  EXPECT_EQ(oracle::count_kind(t, EventKind::dom_event), 2u + 2u + 2u + 1u + 2u);
  EXPECT_EQ(oracle::count_kind(t, EventKind::web_request), 2u + 1u + 1u);
  EXPECT_EQ(oracle::count_kind(t, EventKind::web_response), 2u + 1u);
  EXPECT_EQ(t.events.size(), 16u);
}

TEST(EmitTrace, MatchesGoldenFixture) {
  EXPECT_EQ(serialize_events(fixture_trace().events), read("tests/golden/client_side_fixture.jsonl"));
}

TEST(EmitTrace, ImmediateOrdersAuctionEndFirst) {
  auto t = fixture_trace(WrapperPolicy::immediate);
  auto n = names(t);
  auto end = std::find(n.begin(), n.end(), "auctionEnd");
  auto resp = std::find(n.begin(), n.end(), "bidResponse");
  EXPECT_LT(end, resp);
  EXPECT_EQ(oracle::count_dom(t, DomEvent::bidWon), 0u);
}

TEST(EmitTrace, ServerSideFingerprint) {
  auto c = fx::catalog({fx::partner("dfp", "doubleclick.net", 10, 0), fx::partner("X", "x.example", 10, 0.4)});
  auto s = fx::site(Facet::server_side, {"X"}, 250);
  s.ad_server_partner_id = "dfp";
  auto t = emit_trace(run_server_side(s, c, 1), s, c);
  EXPECT_EQ(oracle::count_dom(t, DomEvent::bidRequested), 0u);
  EXPECT_EQ(oracle::count_kind(t, EventKind::web_request), 1u);
  EXPECT_EQ(url_host(*t.events.front().url), "doubleclick.net");
}

TEST(EmitTrace, WaterfallFingerprint) {
  auto c = fx::catalog({fx::partner("A", "a.example", 150, 0.5, 0.0), fx::partner("B", "b.example", 180, 0.3)});
  auto s = fx::site(Facet::waterfall_only, {"A", "B"});
  auto t = emit_trace(run_waterfall(s, c, 1), s, c);
  EXPECT_EQ(oracle::count_kind(t, EventKind::dom_event), 0u);
  EXPECT_FALSE(oracle::has_hb_param(t));
  EXPECT_EQ(t.events.size(), 4u);
  EXPECT_EQ(t.events.back().ts, fx::ms(330));
  for (const auto& e : t.events) EXPECT_FALSE(e.auction_id);
}

TEST(EmitTrace, EventCountsMatchEnumeration) {
  for (std::uint64_t i = 0; i < 1000; ++i) {
    auto c = gen::random_hb_case(51, i);
    auto out = simulate_round(c.site, c.catalog, c.seed, 0);
    auto t = emit_trace(out, c.site, c.catalog);
    ASSERT_EQ(oracle::count_events(t), oracle::expected_events(std::get<AuctionOutcome>(out))) << i;
  }
}

TEST(EmitTrace, FingerprintsOverRandomRounds) {
  for (std::uint64_t i = 0; i < 1000; ++i) {
    auto c = gen::random_hb_case(61, i);
    auto t = emit_trace(simulate_round(c.site, c.catalog, c.seed, 0), c.site, c.catalog);
    if (c.site.facet == Facet::server_side) {
      ASSERT_EQ(oracle::count_dom(t, DomEvent::bidRequested), 0u);
      ASSERT_EQ(oracle::count_kind(t, EventKind::web_request), 1u);
    }
    auto w = gen::random_waterfall_case(61, i);
    auto wt = emit_trace(simulate_round(w.site, w.catalog, w.seed, 0), w.site, w.catalog);
    ASSERT_EQ(oracle::count_kind(wt, EventKind::dom_event), 0u);
    ASSERT_FALSE(oracle::has_hb_param(wt));
  }
}

TEST(TraceIo, RoundTripRandomRounds) {
  for (std::uint64_t i = 0; i < 500; ++i) {
    auto c = gen::random_hb_case(71, i);
    auto t = emit_trace(simulate_round(c.site, c.catalog, c.seed, 0), c.site, c.catalog);
    auto text = serialize_events(t.events);
    auto back = parse_events(text);
    ASSERT_EQ(back, t.events);
    ASSERT_EQ(serialize_events(back), text);
  }
}

TEST(TraceIo, FixedKeyOrder) {
  TraceEvent e{fx::ms(1.5), EventKind::web_response, std::nullopt, "https://x.example/a", Direction::inbound,
               {{"z", "1"}, {"a", "2"}}, "site-r0", "s1"};
  EXPECT_EQ(serialize_event(e),
            R"({"ts_ms":1.5,"kind":"web_response","url":"https://x.example/a","direction":"inbound",)"
            R"("params":{"a":"2","z":"1"},"auction_id":"site-r0","slot_id":"s1"})");
}

TEST(TraceIo, StrictParsing) {
  EXPECT_THROW(parse_event("{", 3), TraceParseError);
  EXPECT_THROW(parse_event("[]"), TraceParseError);
  EXPECT_THROW(parse_event(R"({"kind":"dom_event","event_name":"auctionInit"})"), TraceParseError);
  EXPECT_THROW(parse_event(R"({"ts_ms":-1,"kind":"dom_event","event_name":"auctionInit"})"), TraceParseError);
  EXPECT_THROW(parse_event(R"({"ts_ms":0,"kind":"dom_event"})"), TraceParseError);
  EXPECT_THROW(parse_event(R"({"ts_ms":0,"kind":"dom_event","event_name":"pageLoad"})"), TraceParseError);
  EXPECT_THROW(parse_event(R"({"ts_ms":0,"kind":"web_request","url":"https://a"})"), TraceParseError);
  EXPECT_THROW(parse_event(R"({"ts_ms":0,"kind":"dom_event","event_name":"auctionInit","extra":1})"), TraceParseError);
  EXPECT_THROW(parse_event(R"({"ts_ms":0,"kind":"dom_event","event_name":"auctionInit","params":{"a":1}})"),
               TraceParseError);
  try {
    parse_events("{\"ts_ms\":0,\"kind\":\"dom_event\",\"event_name\":\"auctionInit\"}\n\nnot json\n");
    FAIL();
  } catch (const TraceParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  auto ok = parse_event(R"({"ts_ms":12,"kind":"dom_event","event_name":"bidWon"})");
  EXPECT_EQ(ok.ts, Millis::from_whole(12));
  EXPECT_EQ(parse_events("").size(), 0u);
}

TEST(TraceIo, TruthRoundTrip) {
  TruthRecord t{"site00001", 2, Facet::hybrid, {{"s1", "rubicon", fx::cpm(0.031)}, {"s2", "dfp", fx::cpm(2)}}, 3, fx::ms(812.125)};
  EXPECT_EQ(parse_truth(serialize_truth(t)), t);
  TruthRecord none{"quiet", 0, Facet::no_ads, {}, 0, std::nullopt};
  EXPECT_EQ(parse_truth(serialize_truth(none)), none);
}

TEST(TraceIo, Stem) { EXPECT_EQ(trace_stem("site00001", 4), "site00001__r4"); }
