#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace edgefed {

/// Simulated time in integer microseconds. All timing arithmetic is exact.
class SimTime {
 public:
  constexpr SimTime() = default;
  static constexpr SimTime from_micros(std::int64_t us) { return SimTime{us}; }
  /// Rounds to the nearest microsecond.
  static SimTime from_seconds(double s);

  constexpr std::int64_t micros() const { return us_; }
  constexpr double seconds() const { return static_cast<double>(us_) / 1e6; }

  constexpr SimTime operator+(SimTime o) const { return SimTime{us_ + o.us_}; }
  constexpr SimTime operator-(SimTime o) const { return SimTime{us_ - o.us_}; }
  constexpr SimTime& operator+=(SimTime o) {
    us_ += o.us_;
    return *this;
  }
  constexpr SimTime operator*(std::int64_t k) const { return SimTime{us_ * k}; }
  constexpr auto operator<=>(const SimTime&) const = default;

 private:
  constexpr explicit SimTime(std::int64_t us) : us_(us) {}
  std::int64_t us_ = 0;
};

/// Fixed-point currency with 6 fractional digits.
class Amount {
 public:
  static constexpr std::int64_t kScale = 1'000'000;

  constexpr Amount() = default;
  static constexpr Amount from_micro(std::int64_t units) { return Amount{units}; }
  /// Rounds half away from zero to 6 decimals.
  static Amount from_double(double v);
  /// Parses "12", "0.135", "-3.5"; more than 6 decimals is an error.
  static Amount parse(std::string_view text);

  constexpr std::int64_t micro() const { return units_; }
  double to_double() const { return static_cast<double>(units_) / kScale; }
  std::string to_string() const;

  constexpr Amount operator+(Amount o) const { return Amount{units_ + o.units_}; }
  constexpr Amount operator-(Amount o) const { return Amount{units_ - o.units_}; }
  constexpr Amount& operator+=(Amount o) {
    units_ += o.units_;
    return *this;
  }
  constexpr Amount& operator-=(Amount o) {
    units_ -= o.units_;
    return *this;
  }
  constexpr auto operator<=>(const Amount&) const = default;

 private:
  constexpr explicit Amount(std::int64_t u) : units_(u) {}
  std::int64_t units_ = 0;
};

/// 20-byte participant identifier, ordered byte-lexicographically.
class Address {
 public:
  static constexpr std::size_t kSize = 20;

  Address() = default;
  explicit Address(const std::array<std::uint8_t, kSize>& bytes) : bytes_(bytes) {}
  /// Deterministic address derived from a label (first 20 bytes of SHA-256).
  static Address derive(std::string_view label);
  /// Accepts 40 hex chars with optional 0x prefix.
  static Address from_hex(std::string_view hex);

  std::string hex() const;
  const std::array<std::uint8_t, kSize>& bytes() const { return bytes_; }
  auto operator<=>(const Address&) const = default;

 private:
  std::array<std::uint8_t, kSize> bytes_{};
};

using Digest = std::array<std::uint8_t, 32>;

Digest sha256(std::span<const std::uint8_t> data);
std::string to_hex(std::span<const std::uint8_t> data);

/// Canonical byte encoding: fixed-width big-endian integers and
/// length-prefixed strings. Used for every digest in the project.
class CanonicalWriter {
 public:
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
  void str(std::string_view s);
  void bytes(std::span<const std::uint8_t> b);
  void address(const Address& a) { bytes(a.bytes()); }
  void time(SimTime t) { i64(t.micros()); }
  void amount(Amount a) { i64(a.micro()); }

  const std::vector<std::uint8_t>& data() const { return buf_; }
  Digest digest() const { return sha256(buf_); }

 private:
  std::vector<std::uint8_t> buf_;
};

/// Formats seconds from microseconds with exactly 6 fractional digits.
std::string format_seconds(SimTime t);
std::string format_micros_as_seconds(std::int64_t us);
/// Parses a decimal seconds string exactly into microseconds.
std::int64_t parse_seconds_micros(std::string_view text);

}  // namespace edgefed

template <>
struct std::hash<edgefed::Address> {
  std::size_t operator()(const edgefed::Address& a) const noexcept {
    std::size_t h = 0;
    for (auto b : a.bytes()) h = h * 131 + b;
    return h;
  }
};
