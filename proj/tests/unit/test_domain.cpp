#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "hbarena/netsim.hpp"

using namespace hbarena;

namespace {

WebsiteScenario minimal() {
  auto s = fx::site(Facet::client_side, {"A"});
  s.wrapper_policy = WrapperPolicy::wait_timeout;
  s.timeout_ms = 3000;
  return s;
}

}  // namespace

TEST(ValidateScenario, MinimalIsClean) { EXPECT_TRUE(validate_scenario(minimal()).empty()); }

TEST(ValidateScenario, ZeroSlots) {
  auto s = minimal();
  s.slots.clear();
  auto v = validate_scenario(s);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_TRUE(v[0].is_error());
  EXPECT_EQ(v[0].message, "slots empty");
}

TEST(ValidateScenario, TwentyOneSlotsWarnOnly) {
  auto s = minimal();
  s.slots.clear();
  for (int i = 0; i < 21; ++i) s.slots.push_back(fx::slot("s" + std::to_string(i), 300, 250, 0.0));
  auto v = validate_scenario(s);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_FALSE(v[0].is_error());
  EXPECT_FALSE(has_errors(v));
  s.slots.pop_back();
  EXPECT_TRUE(validate_scenario(s).empty());
}

TEST(ValidateScenario, FacetRequirements) {
  auto server = fx::site(Facet::server_side, {});
  EXPECT_TRUE(has_errors(validate_scenario(server)));
  server.ad_server_partner_id = "dfp";
  EXPECT_FALSE(has_errors(validate_scenario(server)));

  auto hybrid = fx::site(Facet::hybrid, {"A"});
  EXPECT_TRUE(has_errors(validate_scenario(hybrid)));
  hybrid.ad_server_partner_id = "dfp";
  EXPECT_FALSE(has_errors(validate_scenario(hybrid)));

  auto client = minimal();
  client.partners.clear();
  EXPECT_TRUE(has_errors(validate_scenario(client)));

  auto wf = fx::site(Facet::waterfall_only, {});
  EXPECT_TRUE(has_errors(validate_scenario(wf)));

  WebsiteScenario none;
  none.site_id = "quiet";
  none.facet = Facet::no_ads;
  EXPECT_TRUE(validate_scenario(none).empty());
}

TEST(ValidateScenario, CollectsEveryViolation) {
  auto s = minimal();
  s.site_id.clear();
  s.rank = 0;
  s.timeout_ms = 0;
  s.partners = {"A", "A"};
  s.slots = {fx::slot("x", 0, 250, -1.0), fx::slot("x", 300, 250, 0.0)};
  s.ad_server_latency = LatencyModel::fixed(0.0);
  auto v = validate_scenario(s);
  EXPECT_GE(v.size(), 7u);
  EXPECT_TRUE(has_errors(v));
}

TEST(ValidatePartner, Ranges) {
  auto p = fx::partner("A", "a.example", 100, 0.5);
  EXPECT_TRUE(validate_partner(p).empty());
  p.response_probability = 1.5;
  EXPECT_TRUE(has_errors(validate_partner(p)));
  p = fx::partner("A", "not a host", 100, 0.5);
  EXPECT_TRUE(has_errors(validate_partner(p)));
  p = fx::partner("A", "a.example", 0, 0.5);
  EXPECT_TRUE(has_errors(validate_partner(p)));
  p = fx::partner("A", "a.example", 100, 0.5);
  p.size_bid_models["300x250"] = BidModel::empirical({});
  EXPECT_TRUE(has_errors(validate_partner(p)));
}

TEST(BidModelFor, SizeOverride) {
  auto p = fx::partner("A", "a.example", 100, 0.5);
  p.size_bid_models["300x50"] = BidModel::fixed(0.00084);
  EXPECT_EQ(p.bid_model_for("300x50"), BidModel::fixed(0.00084));
  EXPECT_EQ(p.bid_model_for("728x90"), BidModel::fixed(0.5));
}

TEST(ResolvePartner, Throws) {
  auto c = fx::two_bidders();
  EXPECT_EQ(resolve_partner(c, "A").partner_id, "A");
  EXPECT_THROW(resolve_partner(c, "Z"), ConfigError);
}

TEST(LookupPartner, LabelBoundary) {
  PartnerDirectory d(std::map<std::string, PartnerId>{{"adnxs.com", "appnexus"}});
  EXPECT_EQ(lookup_partner("adnxs.com", d), "appnexus");
  EXPECT_EQ(lookup_partner("sub.adnxs.com", d), "appnexus");
  EXPECT_EQ(lookup_partner("a.b.adnxs.com", d), "appnexus");
  EXPECT_EQ(lookup_partner("ADNXS.com.", d), "appnexus");
  EXPECT_FALSE(lookup_partner("example.com", d));
  EXPECT_FALSE(lookup_partner("notadnxs.com", d));
  EXPECT_FALSE(lookup_partner("adnxs.com.evil.example", d));
  EXPECT_FALSE(lookup_partner("", d));
  EXPECT_FALSE(lookup_partner("bad host.adnxs.com", d));
}

TEST(LookupPartner, LongestSuffixWins) {
  PartnerDirectory d(std::map<std::string, PartnerId>{{"example.com", "outer"}, {"ads.example.com", "inner"}});
  EXPECT_EQ(lookup_partner("x.ads.example.com", d), "inner");
  EXPECT_EQ(lookup_partner("x.example.com", d), "outer");
}

TEST(LookupPartner, MatchesBruteForceOverRandomHosts) {
  const std::vector<std::string> labels = {"a", "b", "ads", "com", "net", "x-y"};
  PartnerDirectory d(std::map<std::string, PartnerId>{{"a.com", "p1"}, {"ads.a.com", "p2"}, {"net", "p3"}, {"b.x-y.com", "p4"}});
  RngStream r(77, "lookup", 0, "hosts");
  for (int i = 0; i < 5000; ++i) {
    int n = 1 + static_cast<int>(r.next_u64() % 4);
    std::string host;
    for (int k = 0; k < n; ++k) host += (k ? "." : "") + labels[r.next_u64() % labels.size()];
    // Brute force: every registered suffix that equals host or ends it after a dot.
    std::optional<PartnerId> want;
    std::size_t best = 0;
    for (const auto& [suffix, id] : d.entries()) {
      bool match = host == suffix ||
                   (host.size() > suffix.size() && host.compare(host.size() - suffix.size(), suffix.size(), suffix) == 0 &&
                    host[host.size() - suffix.size() - 1] == '.');
      if (match && suffix.size() > best) {
        best = suffix.size();
        want = id;
      }
    }
    ASSERT_EQ(lookup_partner(host, d), want) << host;
  }
}

TEST(Hosts, UrlHostAndValidity) {
  EXPECT_EQ(url_host("https://Sub.Adnxs.com:443/hb/bid?x=1"), "sub.adnxs.com");
  EXPECT_EQ(url_host("https://user@host.example/path"), "host.example");
  EXPECT_EQ(url_host("not a url"), "");
  EXPECT_TRUE(is_valid_hostname("a-b.example"));
  EXPECT_FALSE(is_valid_hostname("-a.example"));
  EXPECT_FALSE(is_valid_hostname("a..example"));
  EXPECT_FALSE(is_valid_hostname(std::string(64, 'a') + ".com"));
}

TEST(Enums, RoundTrip) {
  for (auto f : {Facet::client_side, Facet::server_side, Facet::hybrid, Facet::waterfall_only, Facet::no_ads})
    EXPECT_EQ(parse_facet(to_string(f)), f);
  for (auto p : {WrapperPolicy::wait_all, WrapperPolicy::wait_timeout, WrapperPolicy::immediate})
    EXPECT_EQ(parse_wrapper_policy(to_string(p)), p);
  EXPECT_FALSE(parse_facet("header"));
}
