#pragma once

#include <string>
#include <vector>

#include "hbarena/domain.hpp"

namespace fx {

using namespace hbarena;

inline DemandPartnerSpec partner(std::string id, std::string host, double latency_ms, double cpm, double p = 1.0) {
  DemandPartnerSpec s;
  s.partner_id = std::move(id);
  s.domains = {std::move(host)};
  s.latency_model = LatencyModel::fixed(latency_ms);
  s.bid_model = BidModel::fixed(cpm);
  s.response_probability = p;
  return s;
}

inline AdSlotSpec slot(std::string id, int w, int h, double floor) {
  return AdSlotSpec{std::move(id), w, h, Cpm::from_double(floor)};
}

inline PartnerCatalog catalog(std::vector<DemandPartnerSpec> ps) {
  PartnerCatalog c;
  for (auto& p : ps) c[p.partner_id] = std::move(p);
  return c;
}

inline WebsiteScenario site(Facet f, std::vector<PartnerId> partners, double ad_server_ms = 150) {
  WebsiteScenario s;
  s.site_id = "fixture";
  s.facet = f;
  s.slots = {slot("s1", 300, 250, 0.1)};
  s.partners = std::move(partners);
  s.ad_server_latency = LatencyModel::fixed(ad_server_ms);
  return s;
}

// Two client bidders: A answers at 100ms with 0.5, B at 200ms with 0.2.
inline PartnerCatalog two_bidders() {
  return catalog({partner("A", "a.example", 100, 0.5), partner("B", "b.example", 200, 0.2)});
}

inline Millis ms(double v) { return Millis::from_double(v); }
inline Cpm cpm(double v) { return Cpm::from_double(v); }

}  // namespace fx
