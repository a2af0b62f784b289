#pragma once

#include <compare>
#include <cstdint>
#include <limits>

namespace bbrsim {

// Integer-nanosecond simulation time. Used both for instants (since run start)
// and for durations; there is no floating-point time anywhere in the engine.
class SimTime {
 public:
  constexpr SimTime() = default;

  static constexpr SimTime from_ns(std::int64_t ns) { return SimTime(ns); }
  static constexpr SimTime from_us(std::int64_t us) { return SimTime(us * 1'000); }
  static constexpr SimTime from_ms(std::int64_t ms) { return SimTime(ms * 1'000'000); }
  static constexpr SimTime from_s(std::int64_t s) { return SimTime(s * 1'000'000'000); }
  static constexpr SimTime max() { return SimTime(std::numeric_limits<std::int64_t>::max()); }

  constexpr std::int64_t ns() const { return ns_; }
  constexpr double seconds() const { return static_cast<double>(ns_) * 1e-9; }
  constexpr double millis() const { return static_cast<double>(ns_) * 1e-6; }

  constexpr auto operator<=>(const SimTime&) const = default;

  constexpr SimTime operator+(SimTime o) const { return SimTime(ns_ + o.ns_); }
  constexpr SimTime operator-(SimTime o) const { return SimTime(ns_ - o.ns_); }
  constexpr SimTime& operator+=(SimTime o) { ns_ += o.ns_; return *this; }
  constexpr SimTime& operator-=(SimTime o) { ns_ -= o.ns_; return *this; }
  constexpr SimTime operator*(std::int64_t k) const { return SimTime(ns_ * k); }
  constexpr SimTime operator/(std::int64_t k) const { return SimTime(ns_ / k); }
  constexpr std::int64_t operator/(SimTime o) const { return ns_ / o.ns_; }
  constexpr SimTime operator%(SimTime o) const { return SimTime(ns_ % o.ns_); }

 private:
  constexpr explicit SimTime(std::int64_t ns) : ns_(ns) {}
  std::int64_t ns_ = 0;
};

namespace literals {
constexpr SimTime operator""_ns(unsigned long long v) { return SimTime::from_ns(static_cast<std::int64_t>(v)); }
constexpr SimTime operator""_us(unsigned long long v) { return SimTime::from_us(static_cast<std::int64_t>(v)); }
constexpr SimTime operator""_ms(unsigned long long v) { return SimTime::from_ms(static_cast<std::int64_t>(v)); }
constexpr SimTime operator""_s(unsigned long long v) { return SimTime::from_s(static_cast<std::int64_t>(v)); }
}  // namespace literals

// Bytes-per-interval arithmetic. Rates are integer bits per second; all
// divisions round down.
constexpr std::uint64_t kNanosPerSecond = 1'000'000'000ULL;

/// Time to move `bytes` at `rate_bps`, rounded down to whole nanoseconds.
constexpr SimTime transmit_time(std::uint64_t bytes, std::uint64_t rate_bps) {
  const auto bits = static_cast<unsigned __int128>(bytes) * 8U;
  return SimTime::from_ns(static_cast<std::int64_t>(bits * kNanosPerSecond / rate_bps));
}

/// Bytes carried by `rate_bps` over `dt`, rounded down.
constexpr std::uint64_t bytes_in(std::uint64_t rate_bps, SimTime dt) {
  const auto bits = static_cast<unsigned __int128>(rate_bps) * static_cast<std::uint64_t>(dt.ns());
  return static_cast<std::uint64_t>(bits / (8U * kNanosPerSecond));
}

/// Rate in bits per second of `bytes` delivered over `dt` (dt > 0), rounded down.
constexpr std::uint64_t rate_of(std::uint64_t bytes, SimTime dt) {
  const auto bits = static_cast<unsigned __int128>(bytes) * 8U * kNanosPerSecond;
  return static_cast<std::uint64_t>(bits / static_cast<std::uint64_t>(dt.ns()));
}

constexpr std::uint64_t mbps(double v) { return static_cast<std::uint64_t>(v * 1e6); }
constexpr double to_mbps(std::uint64_t bps) { return static_cast<double>(bps) * 1e-6; }

}  // namespace bbrsim
