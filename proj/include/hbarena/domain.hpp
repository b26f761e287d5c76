#pragma once

// Core vocabulary shared by the simulator, the trace emitter, the detector
// and the analytics layer.

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hbarena/decimal.hpp"

namespace hbarena {

using PartnerId = std::string;

/// Raised when a scenario, partner or model cannot be run as configured.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when an API is called outside its documented contract.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

enum class Facet { client_side, server_side, hybrid, waterfall_only, no_ads };
enum class WrapperPolicy { wait_all, wait_timeout, immediate };

std::string_view to_string(Facet f);
std::string_view to_string(WrapperPolicy p);
std::optional<Facet> parse_facet(std::string_view s);
std::optional<WrapperPolicy> parse_wrapper_policy(std::string_view s);
inline bool is_hb(Facet f) {
  return f == Facet::client_side || f == Facet::server_side || f == Facet::hybrid;
}

enum class DistributionKind { fixed, lognormal, empirical };

std::string_view to_string(DistributionKind k);
std::optional<DistributionKind> parse_distribution_kind(std::string_view s);

/// A one-dimensional sampling distribution. For `lognormal`, mu and sigma
/// describe the underlying normal in log units.
struct Distribution {
  DistributionKind kind = DistributionKind::fixed;
  double value = 0.0;
  double mu = 0.0;
  double sigma = 0.0;
  std::vector<double> samples;

  bool operator==(const Distribution&) const = default;
};

/// Distribution tagged with what it produces, so latency and price models
/// cannot be swapped by accident.
template <class Tag>
struct Model {
  Distribution dist;

  static Model fixed(double v) { return Model{Distribution{DistributionKind::fixed, v, 0.0, 0.0, {}}}; }
  static Model lognormal(double mu, double sigma) {
    return Model{Distribution{DistributionKind::lognormal, 0.0, mu, sigma, {}}};
  }
  static Model empirical(std::vector<double> samples) {
    return Model{Distribution{DistributionKind::empirical, 0.0, 0.0, 0.0, std::move(samples)}};
  }

  bool operator==(const Model&) const = default;
};

struct LatencyTag;
struct BidTag;
using LatencyModel = Model<LatencyTag>;  // milliseconds
using BidModel = Model<BidTag>;          // USD CPM

struct AdSlotSpec {
  std::string slot_id;
  int width = 0;
  int height = 0;
  Cpm floor_price;

  std::string size_key() const { return std::to_string(width) + "x" + std::to_string(height); }
  bool operator==(const AdSlotSpec&) const = default;
};

struct DemandPartnerSpec {
  PartnerId partner_id;
  std::vector<std::string> domains;
  LatencyModel latency_model = LatencyModel::fixed(100.0);
  BidModel bid_model = BidModel::fixed(0.0);
  /// Optional per-size price models ("300x250" -> model) overriding bid_model.
  std::map<std::string, BidModel> size_bid_models;
  double response_probability = 1.0;

  const BidModel& bid_model_for(const std::string& size_key) const;
  /// Host used in synthetic request URLs.
  const std::string& primary_host() const { return domains.front(); }
};

using PartnerCatalog = std::map<PartnerId, DemandPartnerSpec>;

inline constexpr std::int64_t kDefaultTimeoutMs = 3000;
inline constexpr std::size_t kSlotWarningThreshold = 20;

struct WebsiteScenario {
  std::string site_id;
  std::int64_t rank = 1;
  Facet facet = Facet::client_side;
  std::vector<AdSlotSpec> slots;
  /// Client-side bidders (client_side, hybrid), backend bidders (server_side)
  /// or waterfall tiers in priority order (waterfall_only).
  std::vector<PartnerId> partners;
  /// Bidders the ad server consults on its own in the hybrid facet.
  std::vector<PartnerId> server_partners;
  WrapperPolicy wrapper_policy = WrapperPolicy::wait_timeout;
  std::int64_t timeout_ms = kDefaultTimeoutMs;
  LatencyModel ad_server_latency = LatencyModel::fixed(100.0);
  std::optional<PartnerId> ad_server_partner_id;
  double render_failure_probability = 0.0;
};

struct Violation {
  enum class Severity { error, warning };
  Severity severity = Severity::error;
  std::string field;
  std::string message;

  bool is_error() const { return severity == Severity::error; }
};

/// Reports every invariant violation on `s`. Never throws.
std::vector<Violation> validate_scenario(const WebsiteScenario& s);
std::vector<Violation> validate_partner(const DemandPartnerSpec& p);
std::vector<Violation> validate_model(const Distribution& d, std::string_view field, bool strictly_positive);
bool has_errors(const std::vector<Violation>& v);

/// Resolves a partner referenced by a scenario or throws ConfigError.
const DemandPartnerSpec& resolve_partner(const PartnerCatalog& catalog, const PartnerId& id);

bool is_valid_hostname(std::string_view host);
/// Lowercased host with any trailing dot removed.
std::string normalize_host(std::string_view host);
/// Host component of an http(s) URL, normalized; empty when absent.
std::string url_host(std::string_view url);

class PartnerDirectory {
 public:
  PartnerDirectory() = default;
  explicit PartnerDirectory(std::map<std::string, PartnerId> entries);

  void add(std::string_view suffix, PartnerId partner);
  void merge(const PartnerDirectory& other);
  const std::map<std::string, PartnerId>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

  static PartnerDirectory from_catalog(const PartnerCatalog& catalog);

 private:
  std::map<std::string, PartnerId> entries_;
};

/// Longest registered suffix of `host` on a label boundary.
std::optional<PartnerId> lookup_partner(std::string_view host, const PartnerDirectory& d);

}  // namespace hbarena
