#pragma once

// Fixed-point quantities used throughout the simulator.
//
// Virtual time is kept in integer thousandths of a millisecond and prices in
// integer millionths of a USD CPM. Samplers produce doubles which are rounded
// exactly once (half-to-even) at the boundary; everything downstream is
// integer arithmetic, so reports are bit-stable across platforms.

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace hbarena {

namespace decimal {

/// Round `value * 10^places` to the nearest integer, ties to even.
std::int64_t scale_round(double value, int places);

/// Parse a plain decimal literal ("12", "-0.5", "0.00084", "1e-3") into an
/// integer scaled by 10^places, rounding extra digits half-to-even.
/// Returns nullopt for anything that is not a finite decimal number.
std::optional<std::int64_t> parse_scaled(std::string_view text, int places);

/// Format a scaled integer with trailing fractional zeros removed
/// (350000 @3 -> "350", 31000 @6 -> "0.031").
std::string format_scaled(std::int64_t scaled, int places);

/// Shortest round-trip decimal text for a double.
std::string shortest(double value);

}  // namespace decimal

class Millis {
 public:
  static constexpr int kPlaces = 3;
  static constexpr std::int64_t kScale = 1000;

  constexpr Millis() = default;
  static constexpr Millis from_thousandths(std::int64_t t) { return Millis(t); }
  static constexpr Millis from_whole(std::int64_t ms) { return Millis(ms * kScale); }
  static Millis from_double(double ms) { return Millis(decimal::scale_round(ms, kPlaces)); }
  static std::optional<Millis> parse(std::string_view text);

  constexpr std::int64_t thousandths() const { return value_; }
  constexpr double as_double() const { return static_cast<double>(value_) / kScale; }
  std::string str() const { return decimal::format_scaled(value_, kPlaces); }

  constexpr Millis operator+(Millis o) const { return Millis(value_ + o.value_); }
  constexpr Millis operator-(Millis o) const { return Millis(value_ - o.value_); }
  constexpr Millis& operator+=(Millis o) {
    value_ += o.value_;
    return *this;
  }
  constexpr auto operator<=>(const Millis&) const = default;

 private:
  constexpr explicit Millis(std::int64_t v) : value_(v) {}
  std::int64_t value_ = 0;
};

/// Price in USD CPM.
class Cpm {
 public:
  static constexpr int kPlaces = 6;
  static constexpr std::int64_t kScale = 1000000;

  constexpr Cpm() = default;
  static constexpr Cpm from_micros(std::int64_t m) { return Cpm(m); }
  static Cpm from_double(double cpm) { return Cpm(decimal::scale_round(cpm, kPlaces)); }
  static std::optional<Cpm> parse(std::string_view text);

  constexpr std::int64_t micros() const { return value_; }
  constexpr double as_double() const { return static_cast<double>(value_) / kScale; }
  std::string str() const { return decimal::format_scaled(value_, kPlaces); }

  constexpr auto operator<=>(const Cpm&) const = default;

 private:
  constexpr explicit Cpm(std::int64_t v) : value_(v) {}
  std::int64_t value_ = 0;
};

}  // namespace hbarena
