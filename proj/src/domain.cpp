#include "hbarena/domain.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

namespace hbarena {

std::string_view to_string(Facet f) {
  switch (f) {
    case Facet::client_side: return "client_side";
    case Facet::server_side: return "server_side";
    case Facet::hybrid: return "hybrid";
    case Facet::waterfall_only: return "waterfall_only";
    case Facet::no_ads: return "no_ads";
  }
  return "unknown";
}

std::string_view to_string(WrapperPolicy p) {
  switch (p) {
    case WrapperPolicy::wait_all: return "wait_all";
    case WrapperPolicy::wait_timeout: return "wait_timeout";
    case WrapperPolicy::immediate: return "immediate";
  }
  return "unknown";
}

std::optional<Facet> parse_facet(std::string_view s) {
  for (auto f : {Facet::client_side, Facet::server_side, Facet::hybrid, Facet::waterfall_only, Facet::no_ads}) {
    if (to_string(f) == s) return f;
  }
  return std::nullopt;
}

std::optional<WrapperPolicy> parse_wrapper_policy(std::string_view s) {
  for (auto p : {WrapperPolicy::wait_all, WrapperPolicy::wait_timeout, WrapperPolicy::immediate}) {
    if (to_string(p) == s) return p;
  }
  return std::nullopt;
}

std::string_view to_string(DistributionKind k) {
  switch (k) {
    case DistributionKind::fixed: return "fixed";
    case DistributionKind::lognormal: return "lognormal";
    case DistributionKind::empirical: return "empirical";
  }
  return "unknown";
}

std::optional<DistributionKind> parse_distribution_kind(std::string_view s) {
  for (auto k : {DistributionKind::fixed, DistributionKind::lognormal, DistributionKind::empirical}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

const BidModel& DemandPartnerSpec::bid_model_for(const std::string& size_key) const {
  auto it = size_bid_models.find(size_key);
  return it == size_bid_models.end() ? bid_model : it->second;
}

namespace {

Violation error(std::string field, std::string message) {
  return {Violation::Severity::error, std::move(field), std::move(message)};
}

Violation warning(std::string field, std::string message) {
  return {Violation::Severity::warning, std::move(field), std::move(message)};
}

}  // namespace

std::vector<Violation> validate_model(const Distribution& d, std::string_view field, bool strictly_positive) {
  std::vector<Violation> out;
  std::string f(field);
  auto bad_value = [&](double v) {
    return !std::isfinite(v) || v < 0.0 || (strictly_positive && v <= 0.0);
  };
  switch (d.kind) {
    case DistributionKind::fixed:
      if (bad_value(d.value)) out.push_back(error(f, "fixed value out of range"));
      break;
    case DistributionKind::lognormal:
      if (!std::isfinite(d.mu)) out.push_back(error(f, "lognormal mu must be finite"));
      if (!std::isfinite(d.sigma) || d.sigma < 0.0) out.push_back(error(f, "lognormal sigma must be >= 0"));
      break;
    case DistributionKind::empirical:
      if (d.samples.empty()) out.push_back(error(f, "empirical samples empty"));
      if (std::any_of(d.samples.begin(), d.samples.end(), bad_value))
        out.push_back(error(f, "empirical sample out of range"));
      break;
  }
  return out;
}

std::vector<Violation> validate_partner(const DemandPartnerSpec& p) {
  std::vector<Violation> out;
  auto prefix = "partner " + p.partner_id + ": ";
  if (p.partner_id.empty()) out.push_back(error("partner_id", "partner_id empty"));
  if (p.domains.empty()) out.push_back(error(prefix + "domains", "domains empty"));
  for (const auto& d : p.domains) {
    if (!is_valid_hostname(d)) out.push_back(error(prefix + "domains", "invalid hostname '" + d + "'"));
  }
  if (!(p.response_probability >= 0.0 && p.response_probability <= 1.0))
    out.push_back(error(prefix + "response_probability", "response_probability outside [0,1]"));
  auto append = [&](std::vector<Violation> v) { out.insert(out.end(), v.begin(), v.end()); };
  append(validate_model(p.latency_model.dist, prefix + "latency_model", true));
  append(validate_model(p.bid_model.dist, prefix + "bid_model", false));
  for (const auto& [size, model] : p.size_bid_models) {
    append(validate_model(model.dist, prefix + "size_bid_models." + size, false));
  }
  return out;
}

std::vector<Violation> validate_scenario(const WebsiteScenario& s) {
  std::vector<Violation> out;
  if (s.site_id.empty()) out.push_back(error("site_id", "site_id empty"));
  if (s.rank <= 0) out.push_back(error("rank", "rank must be positive"));
  if (s.timeout_ms <= 0) out.push_back(error("timeout_ms", "timeout_ms must be positive"));
  if (!(s.render_failure_probability >= 0.0 && s.render_failure_probability <= 1.0))
    out.push_back(error("render_failure_probability", "render_failure_probability outside [0,1]"));

  if (s.facet != Facet::no_ads && s.slots.empty()) out.push_back(error("slots", "slots empty"));
  std::set<std::string> slot_ids;
  for (const auto& slot : s.slots) {
    if (slot.slot_id.empty()) out.push_back(error("slots", "slot_id empty"));
    if (!slot_ids.insert(slot.slot_id).second) out.push_back(error("slots", "duplicate slot_id '" + slot.slot_id + "'"));
    if (slot.width <= 0 || slot.height <= 0)
      out.push_back(error("slots", "slot '" + slot.slot_id + "' has non-positive dimensions"));
    if (slot.floor_price < Cpm{}) out.push_back(error("slots", "slot '" + slot.slot_id + "' has negative floor"));
  }
  if (s.slots.size() > kSlotWarningThreshold)
    out.push_back(warning("slots", "more than " + std::to_string(kSlotWarningThreshold) + " slots"));

  std::set<PartnerId> seen;
  for (const auto& p : s.partners) {
    if (!seen.insert(p).second) out.push_back(error("partners", "duplicate partner '" + p + "'"));
  }

  switch (s.facet) {
    case Facet::client_side:
      if (s.partners.empty()) out.push_back(error("partners", "partners empty"));
      if (s.ad_server_partner_id)
        out.push_back(warning("ad_server_partner_id", "ignored for client_side; the publisher runs its own ad server"));
      break;
    case Facet::hybrid:
      if (s.partners.empty()) out.push_back(error("partners", "partners empty"));
      if (!s.ad_server_partner_id) out.push_back(error("ad_server_partner_id", "hybrid requires an ad server partner"));
      break;
    case Facet::server_side:
      if (!s.ad_server_partner_id)
        out.push_back(error("ad_server_partner_id", "server_side requires exactly one ad server endpoint"));
      break;
    case Facet::waterfall_only:
      if (s.partners.empty()) out.push_back(error("partners", "waterfall tier list empty"));
      break;
    case Facet::no_ads:
      break;
  }
  if (s.facet != Facet::hybrid && !s.server_partners.empty())
    out.push_back(warning("server_partners", "only used by the hybrid facet"));

  auto lat = validate_model(s.ad_server_latency.dist, "ad_server_latency", true);
  out.insert(out.end(), lat.begin(), lat.end());
  return out;
}

bool has_errors(const std::vector<Violation>& v) {
  return std::any_of(v.begin(), v.end(), [](const Violation& x) { return x.is_error(); });
}

const DemandPartnerSpec& resolve_partner(const PartnerCatalog& catalog, const PartnerId& id) {
  auto it = catalog.find(id);
  if (it == catalog.end()) throw ConfigError("unresolved partner_id '" + id + "'");
  return it->second;
}

bool is_valid_hostname(std::string_view host) {
  if (!host.empty() && host.back() == '.') host.remove_suffix(1);
  if (host.empty() || host.size() > 253) return false;
  std::size_t start = 0;
  while (true) {
    auto dot = host.find('.', start);
    auto label = host.substr(start, dot == std::string_view::npos ? std::string_view::npos : dot - start);
    if (label.empty() || label.size() > 63) return false;
    if (label.front() == '-' || label.back() == '-') return false;
    for (char c : label) {
      if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-') return false;
    }
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  return true;
}

std::string normalize_host(std::string_view host) {
  std::string out(host);
  if (!out.empty() && out.back() == '.') out.pop_back();
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::string url_host(std::string_view url) {
  auto scheme = url.find("://");
  if (scheme == std::string_view::npos) return {};
  auto rest = url.substr(scheme + 3);
  auto end = rest.find_first_of("/?#");
  auto authority = rest.substr(0, end);
  if (auto at = authority.rfind('@'); at != std::string_view::npos) authority.remove_prefix(at + 1);
  if (auto colon = authority.find(':'); colon != std::string_view::npos) authority = authority.substr(0, colon);
  return normalize_host(authority);
}

PartnerDirectory::PartnerDirectory(std::map<std::string, PartnerId> entries) {
  for (auto& [suffix, partner] : entries) add(suffix, std::move(partner));
}

void PartnerDirectory::add(std::string_view suffix, PartnerId partner) {
  entries_[normalize_host(suffix)] = std::move(partner);
}

void PartnerDirectory::merge(const PartnerDirectory& other) {
  for (const auto& [suffix, partner] : other.entries_) entries_[suffix] = partner;
}

PartnerDirectory PartnerDirectory::from_catalog(const PartnerCatalog& catalog) {
  PartnerDirectory d;
  for (const auto& [id, spec] : catalog) {
    for (const auto& domain : spec.domains) d.add(domain, id);
  }
  return d;
}

std::optional<PartnerId> lookup_partner(std::string_view host, const PartnerDirectory& d) {
  if (!is_valid_hostname(host)) return std::nullopt;
  std::string candidate = normalize_host(host);
  const auto& entries = d.entries();
  while (true) {
    if (auto it = entries.find(candidate); it != entries.end()) return it->second;
    auto dot = candidate.find('.');
    if (dot == std::string::npos) return std::nullopt;
    candidate.erase(0, dot + 1);
  }
}

}  // namespace hbarena
