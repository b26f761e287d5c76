#include "hbarena/decimal.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace hbarena::decimal {

namespace {

constexpr std::int64_t pow10(int n) {
  std::int64_t r = 1;
  for (int i = 0; i < n; ++i) r *= 10;
  return r;
}

}  // namespace

std::int64_t scale_round(double value, int places) {
  if (!std::isfinite(value)) throw std::domain_error("non-finite value cannot be rounded");
  // Go through the shortest decimal rendering so that literals such as 0.0005
  // round the way they read rather than the way their binary image does.
  auto parsed = parse_scaled(shortest(value), places);
  if (!parsed) throw std::domain_error("value out of fixed-point range");
  return *parsed;
}

std::optional<std::int64_t> parse_scaled(std::string_view text, int places) {
  if (text.empty()) return std::nullopt;
  std::size_t i = 0;
  bool negative = false;
  if (text[i] == '+' || text[i] == '-') {
    negative = text[i] == '-';
    ++i;
  }
  std::string digits;
  int frac_digits = 0;
  bool seen_point = false;
  bool any_digit = false;
  for (; i < text.size(); ++i) {
    char c = text[i];
    if (c >= '0' && c <= '9') {
      digits.push_back(c);
      any_digit = true;
      if (seen_point) ++frac_digits;
    } else if (c == '.' && !seen_point) {
      seen_point = true;
    } else {
      break;
    }
  }
  if (!any_digit) return std::nullopt;
  int exponent = 0;
  if (i < text.size()) {
    if (text[i] != 'e' && text[i] != 'E') return std::nullopt;
    ++i;
    auto rest = text.substr(i);
    if (!rest.empty() && rest.front() == '+') rest.remove_prefix(1);
    auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), exponent);
    if (ec != std::errc{} || ptr != rest.data() + rest.size()) return std::nullopt;
  }
  // value = digits * 10^(exponent - frac_digits); we want value * 10^places.
  int shift = exponent - frac_digits + places;
  auto first_nonzero = digits.find_first_not_of('0');
  if (first_nonzero == std::string::npos) return 0;
  digits.erase(0, first_nonzero);

  std::string kept;
  std::string dropped;
  if (shift >= 0) {
    kept = digits + std::string(static_cast<std::size_t>(shift), '0');
  } else {
    auto drop = static_cast<std::size_t>(-shift);
    if (drop >= digits.size()) {
      dropped = std::string(drop - digits.size(), '0') + digits;
    } else {
      kept = digits.substr(0, digits.size() - drop);
      dropped = digits.substr(digits.size() - drop);
    }
  }
  if (kept.size() > 18) return std::nullopt;
  std::int64_t magnitude = 0;
  for (char c : kept) magnitude = magnitude * 10 + (c - '0');

  if (!dropped.empty()) {
    char lead = dropped.front();
    bool rest_nonzero = dropped.find_first_not_of('0', 1) != std::string::npos;
    bool round_up = lead > '5' || (lead == '5' && (rest_nonzero || (magnitude % 2 == 1)));
    if (round_up) ++magnitude;
  }
  return negative ? -magnitude : magnitude;
}

std::string format_scaled(std::int64_t scaled, int places) {
  const std::int64_t scale = pow10(places);
  std::string out;
  std::uint64_t mag = scaled < 0 ? static_cast<std::uint64_t>(-(scaled + 1)) + 1
                                 : static_cast<std::uint64_t>(scaled);
  if (scaled < 0) out.push_back('-');
  out += std::to_string(mag / static_cast<std::uint64_t>(scale));
  auto frac = mag % static_cast<std::uint64_t>(scale);
  if (frac != 0) {
    std::string f = std::to_string(frac);
    f.insert(0, static_cast<std::size_t>(places) - f.size(), '0');
    while (!f.empty() && f.back() == '0') f.pop_back();
    out.push_back('.');
    out += f;
  }
  return out;
}

std::string shortest(double value) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc{}) throw std::runtime_error("to_chars failed");
  return std::string(buf.data(), ptr);
}

}  // namespace hbarena::decimal

namespace hbarena {

std::optional<Millis> Millis::parse(std::string_view text) {
  auto v = decimal::parse_scaled(text, kPlaces);
  if (!v) return std::nullopt;
  return Millis(*v);
}

std::optional<Cpm> Cpm::parse(std::string_view text) {
  auto v = decimal::parse_scaled(text, kPlaces);
  if (!v) return std::nullopt;
  return Cpm(*v);
}

}  // namespace hbarena
