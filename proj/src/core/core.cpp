#include "edgefed/core.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>

namespace edgefed {

namespace {

std::int64_t parse_fixed(std::string_view text, int decimals, const char* what) {
  if (text.empty()) throw std::invalid_argument(std::string("empty ") + what);
  bool neg = false;
  std::size_t i = 0;
  if (text[0] == '-' || text[0] == '+') {
    neg = text[0] == '-';
    i = 1;
  }
  std::int64_t whole = 0;
  std::int64_t frac = 0;
  int frac_digits = 0;
  bool seen_digit = false;
  bool in_frac = false;
  for (; i < text.size(); ++i) {
    char c = text[i];
    if (c == '.') {
      if (in_frac) throw std::invalid_argument(std::string("malformed ") + what);
      in_frac = true;
      continue;
    }
    if (c < '0' || c > '9') throw std::invalid_argument(std::string("malformed ") + what + ": " + std::string(text));
    seen_digit = true;
    if (in_frac) {
      if (++frac_digits > decimals) throw std::invalid_argument(std::string("too many decimals in ") + what);
      frac = frac * 10 + (c - '0');
    } else {
      if (whole > std::numeric_limits<std::int64_t>::max() / 100 / 1'000'000)
        throw std::out_of_range(std::string(what) + " out of range");
      whole = whole * 10 + (c - '0');
    }
  }
  if (!seen_digit) throw std::invalid_argument(std::string("malformed ") + what);
  for (; frac_digits < decimals; ++frac_digits) frac *= 10;
  std::int64_t scale = 1;
  for (int d = 0; d < decimals; ++d) scale *= 10;
  std::int64_t v = whole * scale + frac;
  return neg ? -v : v;
}

std::string format_fixed(std::int64_t v, std::int64_t scale, int decimals) {
  bool neg = v < 0;
  std::uint64_t mag = neg ? static_cast<std::uint64_t>(-(v + 1)) + 1 : static_cast<std::uint64_t>(v);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s%llu.%0*llu", neg ? "-" : "",
                static_cast<unsigned long long>(mag / scale), decimals,
                static_cast<unsigned long long>(mag % scale));
  return buf;
}

}  // namespace

SimTime SimTime::from_seconds(double s) {
  return SimTime{static_cast<std::int64_t>(std::llround(s * 1e6))};
}

Amount Amount::from_double(double v) {
  return Amount{static_cast<std::int64_t>(std::llround(v * kScale))};
}

Amount Amount::parse(std::string_view text) { return Amount{parse_fixed(text, 6, "amount")}; }

std::string Amount::to_string() const { return format_fixed(units_, kScale, 6); }

Address Address::derive(std::string_view label) {
  auto d = sha256({reinterpret_cast<const std::uint8_t*>(label.data()), label.size()});
  std::array<std::uint8_t, kSize> b{};
  std::copy_n(d.begin(), kSize, b.begin());
  return Address{b};
}

Address Address::from_hex(std::string_view hex) {
  if (hex.starts_with("0x") || hex.starts_with("0X")) hex.remove_prefix(2);
  if (hex.size() != 2 * kSize) throw std::invalid_argument("address must be 40 hex chars");
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw std::invalid_argument("bad hex digit in address");
  };
  std::array<std::uint8_t, kSize> b{};
  for (std::size_t i = 0; i < kSize; ++i)
    b[i] = static_cast<std::uint8_t>(nibble(hex[2 * i]) << 4 | nibble(hex[2 * i + 1]));
  return Address{b};
}

std::string Address::hex() const { return "0x" + to_hex(bytes_); }

Digest sha256(std::span<const std::uint8_t> data) {
  Digest out{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr) != 1 || len != out.size())
    throw std::runtime_error("sha256 failed");
  return out;
}

std::string to_hex(std::span<const std::uint8_t> data) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s;
  s.reserve(data.size() * 2);
  for (auto b : data) {
    s.push_back(kDigits[b >> 4]);
    s.push_back(kDigits[b & 0xf]);
  }
  return s;
}

void CanonicalWriter::u32(std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) buf_.push_back(static_cast<std::uint8_t>(v >> s));
}

void CanonicalWriter::u64(std::uint64_t v) {
  for (int s = 56; s >= 0; s -= 8) buf_.push_back(static_cast<std::uint8_t>(v >> s));
}

void CanonicalWriter::str(std::string_view s) {
  u32(static_cast<std::uint32_t>(s.size()));
  buf_.insert(buf_.end(), s.begin(), s.end());
}

void CanonicalWriter::bytes(std::span<const std::uint8_t> b) {
  u32(static_cast<std::uint32_t>(b.size()));
  buf_.insert(buf_.end(), b.begin(), b.end());
}

std::string format_seconds(SimTime t) { return format_fixed(t.micros(), 1'000'000, 6); }

std::string format_micros_as_seconds(std::int64_t us) { return format_fixed(us, 1'000'000, 6); }

std::int64_t parse_seconds_micros(std::string_view text) { return parse_fixed(text, 6, "seconds"); }

}  // namespace edgefed
