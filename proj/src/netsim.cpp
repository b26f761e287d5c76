#include "hbarena/netsim.hpp"

#include <cmath>
#include <numbers>

namespace hbarena {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

void fnv_byte(std::uint64_t& h, unsigned char b) {
  h ^= b;
  h *= kFnvPrime;
}

}  // namespace

std::uint64_t RngStream::mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t RngStream::key_hash(std::string_view site_id, std::uint64_t round_index, std::string_view purpose) {
  std::uint64_t h = kFnvOffset;
  for (char c : site_id) fnv_byte(h, static_cast<unsigned char>(c));
  fnv_byte(h, 0x1f);
  for (int i = 0; i < 8; ++i) fnv_byte(h, static_cast<unsigned char>(round_index >> (8 * i)));
  fnv_byte(h, 0x1f);
  for (char c : purpose) fnv_byte(h, static_cast<unsigned char>(c));
  return h;
}

RngStream::RngStream(std::uint64_t master_seed, std::string_view site_id, std::uint64_t round_index,
                     std::string_view purpose)
    : state_(mix64(master_seed + kGolden) ^ mix64(key_hash(site_id, round_index, purpose))) {}

std::uint64_t RngStream::next_u64() {
  state_ += kGolden;
  return mix64(state_);
}

double RngStream::next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double RngStream::next_normal() {
  double u1 = next_unit();
  double u2 = next_unit();
  double radius = std::sqrt(-2.0 * std::log(1.0 - u1));
  return radius * std::cos(2.0 * std::numbers::pi * u2);
}

double sample_raw(const Distribution& d, RngStream& r) {
  switch (d.kind) {
    case DistributionKind::fixed:
      return d.value;
    case DistributionKind::lognormal:
      return std::exp(d.mu + d.sigma * r.next_normal());
    case DistributionKind::empirical: {
      if (d.samples.empty()) throw ConfigError("empirical model has no samples");
      auto n = d.samples.size();
      auto idx = static_cast<std::size_t>(r.next_unit() * static_cast<double>(n));
      return d.samples[idx < n ? idx : n - 1];
    }
  }
  throw ConfigError("unknown distribution kind");
}

Millis sample_latency(const LatencyModel& m, RngStream& r) {
  double raw = sample_raw(m.dist, r);
  if (!std::isfinite(raw) || raw <= 0.0) throw ConfigError("latency model produced a non-positive value");
  Millis ms = Millis::from_double(raw);
  // A positive sample below half a microsecond still has to be positive.
  return ms > Millis{} ? ms : Millis::from_thousandths(1);
}

std::optional<Cpm> sample_bid(const BidModel& m, double response_probability, RngStream& r) {
  if (m.dist.kind == DistributionKind::empirical && m.dist.samples.empty())
    throw ConfigError("empirical model has no samples");
  double u = r.next_unit();
  if (!(u < response_probability)) return std::nullopt;
  double raw = sample_raw(m.dist, r);
  if (!std::isfinite(raw) || raw < 0.0) throw ConfigError("bid model produced a negative value");
  return Cpm::from_double(raw);
}

}  // namespace hbarena
