#pragma once

// Scenario files: partner definitions, explicit sites, and an optional
// generator block that expands into many sites from marginal distributions.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hbarena/domain.hpp"

namespace hbarena {

struct WeightedChoice {
  std::string value;
  double weight = 0.0;
};

struct AnchorPartner {
  PartnerId partner_id;
  double probability = 0.0;
};

/// Marginal distributions for generated sites. Count weights are indexed
/// from 1 (entry i is the weight for i+1 items).
struct GeneratorSpec {
  std::size_t site_count = 0;
  std::string site_prefix = "site";
  std::int64_t rank_start = 1;
  std::map<Facet, double> facet_weights;
  std::vector<WeightedChoice> client_partner_pool;
  std::vector<double> client_partner_count_weights{1.0};
  std::optional<AnchorPartner> anchor_partner;
  std::vector<WeightedChoice> server_partner_pool;
  std::vector<double> server_partner_count_weights{1.0};
  std::vector<double> hybrid_server_partner_count_weights;
  std::vector<WeightedChoice> ad_server_partners;
  std::vector<double> waterfall_tier_count_weights{1.0};
  std::vector<double> slot_count_weights{1.0};
  std::vector<WeightedChoice> slot_sizes{{"300x250", 1.0}};
  BidModel floor_price = BidModel::fixed(0.0);
  std::vector<WeightedChoice> wrapper_policy_weights{{"wait_timeout", 1.0}};
  std::int64_t timeout_ms = kDefaultTimeoutMs;
  LatencyModel ad_server_latency = LatencyModel::fixed(100.0);
};

struct ScenarioFile {
  std::uint64_t master_seed = 0;
  bool master_seed_given = false;
  std::uint32_t rounds_per_site = 1;
  std::string output_dir = "out";
  std::vector<DemandPartnerSpec> partners;
  std::vector<WebsiteScenario> sites;
  std::optional<GeneratorSpec> generator;

  PartnerCatalog catalog() const;
};

LatencyModel parse_latency_model(const nlohmann::json& j);
BidModel parse_bid_model(const nlohmann::json& j);
DemandPartnerSpec parse_partner(const nlohmann::json& j);
WebsiteScenario parse_site(const nlohmann::json& j);
GeneratorSpec parse_generator(const nlohmann::json& j);
ScenarioFile parse_scenario_file(const nlohmann::json& j);
ScenarioFile load_scenario_file(const std::filesystem::path& path);

PartnerDirectory parse_directory(const nlohmann::json& j);
PartnerDirectory load_directory(const std::filesystem::path& path);
std::string serialize_directory(const PartnerDirectory& d);

/// Explicit sites followed by generated ones. Generated facet counts follow
/// the weights exactly (largest-remainder apportionment).
std::vector<WebsiteScenario> expand_sites(const ScenarioFile& file);
std::vector<WebsiteScenario> generate_sites(const GeneratorSpec& g, std::uint64_t master_seed);

/// Apportions `total` items over weights by largest remainder; ties go to
/// the earlier entry.
std::vector<std::size_t> apportion(std::size_t total, const std::vector<double>& weights);

/// Violations across every site plus unresolved partner references,
/// each message prefixed with its site id.
std::vector<Violation> validate_scenario_file(const ScenarioFile& file, const std::vector<WebsiteScenario>& sites);

}  // namespace hbarena
