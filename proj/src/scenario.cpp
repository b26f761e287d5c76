#include "hbarena/scenario.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "hbarena/netsim.hpp"

namespace hbarena {

using nlohmann::json;

namespace {

Distribution parse_distribution(const json& j) {
  if (j.is_number()) return Distribution{DistributionKind::fixed, j.get<double>(), 0.0, 0.0, {}};
  auto kind = parse_distribution_kind(j.at("kind").get<std::string>());
  if (!kind) throw ConfigError("unknown distribution kind '" + j.at("kind").get<std::string>() + "'");
  Distribution d;
  d.kind = *kind;
  switch (d.kind) {
    case DistributionKind::fixed:
      d.value = j.at("value").get<double>();
      break;
    case DistributionKind::lognormal:
      // Either mu (log units) or median (natural units) may be given.
      if (j.contains("median")) {
        double median = j.at("median").get<double>();
        if (!(median > 0.0)) throw ConfigError("lognormal median must be positive");
        d.mu = std::log(median);
      } else {
        d.mu = j.at("mu").get<double>();
      }
      d.sigma = j.at("sigma").get<double>();
      break;
    case DistributionKind::empirical:
      d.samples = j.at("samples").get<std::vector<double>>();
      break;
  }
  return d;
}

std::vector<WeightedChoice> parse_choices(const json& j) {
  std::vector<WeightedChoice> out;
  if (j.is_object()) {
    for (const auto& item : j.items()) out.push_back({item.key(), item.value().get<double>()});
  } else {
    for (const auto& e : j) {
      if (e.is_string()) {
        out.push_back({e.get<std::string>(), 1.0});
      } else {
        out.push_back({e.at("id").get<std::string>(), e.value("weight", 1.0)});
      }
    }
  }
  return out;
}

std::size_t pick_weighted(const std::vector<double>& weights, RngStream& r) {
  double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(total > 0.0)) throw ConfigError("weights must have a positive sum");
  double u = r.next_unit() * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (u < acc) return i;
  }
  for (std::size_t i = weights.size(); i-- > 0;) {
    if (weights[i] > 0.0) return i;
  }
  return 0;
}

std::vector<double> weights_of(const std::vector<WeightedChoice>& c) {
  std::vector<double> w;
  for (const auto& x : c) w.push_back(x.weight);
  return w;
}

// Draws `count` distinct partners by weight, skipping anything in `exclude`.
std::vector<PartnerId> draw_partners(const std::vector<WeightedChoice>& pool, std::size_t count,
                                     const std::set<PartnerId>& exclude, RngStream& r) {
  std::vector<WeightedChoice> remaining;
  for (const auto& c : pool) {
    if (!exclude.count(c.value) && c.weight > 0.0) remaining.push_back(c);
  }
  std::vector<PartnerId> out;
  while (out.size() < count && !remaining.empty()) {
    auto i = pick_weighted(weights_of(remaining), r);
    out.push_back(remaining[i].value);
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(i));
  }
  return out;
}

AdSlotSpec parse_slot(const json& j) {
  AdSlotSpec s;
  s.slot_id = j.at("slot_id").get<std::string>();
  if (j.contains("size")) {
    auto size = j.at("size").get<std::string>();
    auto x = size.find('x');
    if (x == std::string::npos) throw ConfigError("slot size must look like WxH");
    s.width = std::stoi(size.substr(0, x));
    s.height = std::stoi(size.substr(x + 1));
  } else {
    s.width = j.at("width").get<int>();
    s.height = j.at("height").get<int>();
  }
  s.floor_price = Cpm::from_double(j.value("floor_price", 0.0));
  return s;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string pad(std::size_t n, std::size_t width) {
  std::string s = std::to_string(n);
  if (s.size() < width) s.insert(0, width - s.size(), '0');
  return s;
}

}  // namespace

LatencyModel parse_latency_model(const json& j) { return LatencyModel{parse_distribution(j)}; }
BidModel parse_bid_model(const json& j) { return BidModel{parse_distribution(j)}; }

DemandPartnerSpec parse_partner(const json& j) {
  DemandPartnerSpec p;
  p.partner_id = j.at("partner_id").get<std::string>();
  p.domains = j.at("domains").get<std::vector<std::string>>();
  if (j.contains("latency")) p.latency_model = parse_latency_model(j["latency"]);
  if (j.contains("bid")) p.bid_model = parse_bid_model(j["bid"]);
  if (j.contains("size_bids")) {
    for (const auto& item : j["size_bids"].items()) p.size_bid_models[item.key()] = parse_bid_model(item.value());
  }
  p.response_probability = j.value("response_probability", 1.0);
  return p;
}

WebsiteScenario parse_site(const json& j) {
  WebsiteScenario s;
  s.site_id = j.at("site_id").get<std::string>();
  s.rank = j.value("rank", std::int64_t{1});
  auto facet = parse_facet(j.at("facet").get<std::string>());
  if (!facet) throw ConfigError("site '" + s.site_id + "': unknown facet");
  s.facet = *facet;
  for (const auto& slot : j.value("slots", json::array())) s.slots.push_back(parse_slot(slot));
  s.partners = j.value("partners", std::vector<std::string>{});
  s.server_partners = j.value("server_partners", std::vector<std::string>{});
  if (j.contains("wrapper_policy")) {
    auto p = parse_wrapper_policy(j["wrapper_policy"].get<std::string>());
    if (!p) throw ConfigError("site '" + s.site_id + "': unknown wrapper_policy");
    s.wrapper_policy = *p;
  }
  s.timeout_ms = j.value("timeout_ms", kDefaultTimeoutMs);
  if (j.contains("ad_server_latency")) s.ad_server_latency = parse_latency_model(j["ad_server_latency"]);
  if (j.contains("ad_server_partner_id") && !j["ad_server_partner_id"].is_null())
    s.ad_server_partner_id = j["ad_server_partner_id"].get<std::string>();
  s.render_failure_probability = j.value("render_failure_probability", 0.0);
  return s;
}

GeneratorSpec parse_generator(const json& j) {
  GeneratorSpec g;
  g.site_count = j.at("site_count").get<std::size_t>();
  g.site_prefix = j.value("site_prefix", g.site_prefix);
  g.rank_start = j.value("rank_start", g.rank_start);
  for (const auto& item : j.at("facet_weights").items()) {
    auto f = parse_facet(item.key());
    if (!f) throw ConfigError("generator: unknown facet '" + item.key() + "'");
    g.facet_weights[*f] = item.value().get<double>();
  }
  if (j.contains("client_partner_pool")) g.client_partner_pool = parse_choices(j["client_partner_pool"]);
  g.client_partner_count_weights = j.value("client_partner_count_weights", g.client_partner_count_weights);
  if (j.contains("anchor_partner")) {
    g.anchor_partner = AnchorPartner{j["anchor_partner"].at("partner_id").get<std::string>(),
                                     j["anchor_partner"].at("probability").get<double>()};
  }
  if (j.contains("server_partner_pool")) g.server_partner_pool = parse_choices(j["server_partner_pool"]);
  g.server_partner_count_weights = j.value("server_partner_count_weights", g.server_partner_count_weights);
  g.hybrid_server_partner_count_weights =
      j.value("hybrid_server_partner_count_weights", g.hybrid_server_partner_count_weights);
  if (j.contains("ad_server_partners")) g.ad_server_partners = parse_choices(j["ad_server_partners"]);
  g.waterfall_tier_count_weights = j.value("waterfall_tier_count_weights", g.waterfall_tier_count_weights);
  g.slot_count_weights = j.value("slot_count_weights", g.slot_count_weights);
  if (j.contains("slot_sizes")) g.slot_sizes = parse_choices(j["slot_sizes"]);
  if (j.contains("floor_price")) g.floor_price = parse_bid_model(j["floor_price"]);
  if (j.contains("wrapper_policy_weights")) g.wrapper_policy_weights = parse_choices(j["wrapper_policy_weights"]);
  g.timeout_ms = j.value("timeout_ms", g.timeout_ms);
  if (j.contains("ad_server_latency")) g.ad_server_latency = parse_latency_model(j["ad_server_latency"]);
  return g;
}

ScenarioFile parse_scenario_file(const json& j) {
  ScenarioFile f;
  f.master_seed_given = j.contains("master_seed");
  f.master_seed = j.value("master_seed", std::uint64_t{0});
  f.rounds_per_site = j.value("rounds_per_site", std::uint32_t{1});
  f.output_dir = j.value("output_dir", f.output_dir);
  for (const auto& p : j.value("partners", json::array())) f.partners.push_back(parse_partner(p));
  for (const auto& s : j.value("sites", json::array())) f.sites.push_back(parse_site(s));
  if (j.contains("generator")) f.generator = parse_generator(j["generator"]);
  return f;
}

ScenarioFile load_scenario_file(const std::filesystem::path& path) {
  try {
    return parse_scenario_file(json::parse(read_file(path)));
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

PartnerCatalog ScenarioFile::catalog() const {
  PartnerCatalog c;
  for (const auto& p : partners) c[p.partner_id] = p;
  return c;
}

PartnerDirectory parse_directory(const json& j) {
  if (!j.is_object()) throw ConfigError("partner directory must be a JSON object");
  PartnerDirectory d;
  for (const auto& item : j.items()) d.add(item.key(), item.value().get<std::string>());
  return d;
}

PartnerDirectory load_directory(const std::filesystem::path& path) {
  try {
    return parse_directory(json::parse(read_file(path)));
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string serialize_directory(const PartnerDirectory& d) {
  json j = json::object();
  for (const auto& [suffix, partner] : d.entries()) j[suffix] = partner;
  return j.dump(2) + "\n";
}

std::vector<std::size_t> apportion(std::size_t total, const std::vector<double>& weights) {
  std::vector<std::size_t> out(weights.size(), 0);
  double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (weights.empty() || !(sum > 0.0)) return out;
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    double exact = static_cast<double>(total) * weights[i] / sum;
    out[i] = static_cast<std::size_t>(std::floor(exact));
    assigned += out[i];
    remainders.emplace_back(exact - std::floor(exact), i);
  }
  std::stable_sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; assigned < total; ++k, ++assigned) ++out[remainders[k % remainders.size()].second];
  return out;
}

std::vector<WebsiteScenario> generate_sites(const GeneratorSpec& g, std::uint64_t master_seed) {
  constexpr std::array<Facet, 5> facets = {Facet::server_side, Facet::hybrid, Facet::client_side,
                                           Facet::waterfall_only, Facet::no_ads};
  std::vector<double> w;
  for (auto f : facets) w.push_back(g.facet_weights.count(f) ? g.facet_weights.at(f) : 0.0);
  auto counts = apportion(g.site_count, w);
  std::vector<Facet> assignment;
  for (std::size_t i = 0; i < facets.size(); ++i) assignment.insert(assignment.end(), counts[i], facets[i]);
  RngStream shuffle(master_seed, "generator", 0, "facet-shuffle");
  for (std::size_t i = assignment.size(); i > 1; --i) {
    auto j = static_cast<std::size_t>(shuffle.next_u64() % i);
    std::swap(assignment[i - 1], assignment[j]);
  }

  const std::size_t width = std::max<std::size_t>(5, std::to_string(g.site_count).size());
  std::vector<WebsiteScenario> out;
  out.reserve(g.site_count);
  for (std::size_t i = 0; i < g.site_count; ++i) {
    WebsiteScenario s;
    s.site_id = g.site_prefix + pad(i + 1, width);
    s.rank = g.rank_start + static_cast<std::int64_t>(i);
    s.facet = assignment[i];
    s.timeout_ms = g.timeout_ms;
    s.ad_server_latency = g.ad_server_latency;
    auto stream = [&](std::string_view purpose) { return RngStream(master_seed, s.site_id, 0, purpose); };

    if (s.facet != Facet::no_ads) {
      auto r = stream("gen/slots");
      std::size_t n = pick_weighted(g.slot_count_weights, r) + 1;
      auto sizes = weights_of(g.slot_sizes);
      for (std::size_t k = 0; k < n; ++k) {
        const auto& size = g.slot_sizes[pick_weighted(sizes, r)].value;
        AdSlotSpec slot;
        slot.slot_id = "slot" + std::to_string(k + 1);
        auto x = size.find('x');
        slot.width = std::stoi(size.substr(0, x));
        slot.height = std::stoi(size.substr(x + 1));
        auto fr = stream("gen/floor/" + slot.slot_id);
        slot.floor_price = Cpm::from_double(std::max(0.0, sample_raw(g.floor_price.dist, fr)));
        s.slots.push_back(slot);
      }
    }
    {
      auto r = stream("gen/policy");
      auto p = parse_wrapper_policy(g.wrapper_policy_weights[pick_weighted(weights_of(g.wrapper_policy_weights), r)].value);
      if (!p) throw ConfigError("generator: unknown wrapper policy");
      s.wrapper_policy = *p;
    }

    auto draw_client = [&](const std::vector<double>& count_weights) {
      auto r = stream("gen/client-partners");
      std::size_t n = pick_weighted(count_weights, r) + 1;
      std::vector<PartnerId> chosen;
      if (g.anchor_partner && r.next_unit() < g.anchor_partner->probability) chosen.push_back(g.anchor_partner->partner_id);
      std::set<PartnerId> exclude(chosen.begin(), chosen.end());
      if (g.anchor_partner) exclude.insert(g.anchor_partner->partner_id);
      auto rest = draw_partners(g.client_partner_pool, n - chosen.size(), exclude, r);
      chosen.insert(chosen.end(), rest.begin(), rest.end());
      return chosen;
    };
    auto draw_ad_server = [&] {
      if (g.ad_server_partners.empty()) throw ConfigError("generator: ad_server_partners required for server_side/hybrid");
      auto r = stream("gen/ad-server");
      return g.ad_server_partners[pick_weighted(weights_of(g.ad_server_partners), r)].value;
    };
    auto draw_server = [&](const std::vector<double>& count_weights) {
      auto r = stream("gen/server-partners");
      std::size_t n = pick_weighted(count_weights, r) + 1;
      return draw_partners(g.server_partner_pool, n, {}, r);
    };

    switch (s.facet) {
      case Facet::client_side:
        s.partners = draw_client(g.client_partner_count_weights);
        break;
      case Facet::server_side:
        s.ad_server_partner_id = draw_ad_server();
        s.partners = draw_server(g.server_partner_count_weights);
        break;
      case Facet::hybrid:
        s.ad_server_partner_id = draw_ad_server();
        s.partners = draw_client(g.client_partner_count_weights);
        if (!g.hybrid_server_partner_count_weights.empty())
          s.server_partners = draw_server(g.hybrid_server_partner_count_weights);
        break;
      case Facet::waterfall_only:
        s.partners = draw_client(g.waterfall_tier_count_weights);
        break;
      case Facet::no_ads:
        break;
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<WebsiteScenario> expand_sites(const ScenarioFile& file) {
  std::vector<WebsiteScenario> out = file.sites;
  if (file.generator) {
    auto generated = generate_sites(*file.generator, file.master_seed);
    out.insert(out.end(), std::make_move_iterator(generated.begin()), std::make_move_iterator(generated.end()));
  }
  return out;
}

std::vector<Violation> validate_scenario_file(const ScenarioFile& file, const std::vector<WebsiteScenario>& sites) {
  std::vector<Violation> out;
  if (file.rounds_per_site == 0) out.push_back({Violation::Severity::error, "rounds_per_site", "must be positive"});
  if (file.generator && file.generator->site_count == 0)
    out.push_back({Violation::Severity::error, "generator.site_count", "must be positive"});
  std::set<PartnerId> ids;
  for (const auto& p : file.partners) {
    if (!ids.insert(p.partner_id).second)
      out.push_back({Violation::Severity::error, "partners", "duplicate partner '" + p.partner_id + "'"});
    auto v = validate_partner(p);
    out.insert(out.end(), v.begin(), v.end());
  }
  std::set<std::string> site_ids;
  for (const auto& s : sites) {
    if (!site_ids.insert(s.site_id).second)
      out.push_back({Violation::Severity::error, "sites", "duplicate site_id '" + s.site_id + "'"});
    for (auto v : validate_scenario(s)) {
      v.field = s.site_id + "." + v.field;
      out.push_back(std::move(v));
    }
    auto check = [&](const PartnerId& p, const char* field) {
      if (!ids.count(p))
        out.push_back({Violation::Severity::error, s.site_id + "." + field, "unresolved partner_id '" + p + "'"});
    };
    for (const auto& p : s.partners) check(p, "partners");
    for (const auto& p : s.server_partners) check(p, "server_partners");
    if (s.ad_server_partner_id) check(*s.ad_server_partner_id, "ad_server_partner_id");
  }
  return out;
}

}  // namespace hbarena
