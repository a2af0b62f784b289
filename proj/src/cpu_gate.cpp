#include "bbrsim/cpu_gate.hpp"

#include <algorithm>
#include <stdexcept>

namespace bbrsim {

void CpuSchedule::validate() const {
  if (runtime <= SimTime{} || runtime > period) {
    throw std::invalid_argument("cpu schedule: need 0 < runtime <= period");
  }
  if (phase < SimTime{} || phase >= period) {
    throw std::invalid_argument("cpu schedule: need 0 <= phase < period");
  }
}

bool is_on_cpu(SimTime t, const CpuSchedule& s) {
  if (t < s.phase) return false;
  return (t - s.phase) % s.period < s.runtime;
}

SimTime next_on_cpu(SimTime t, const CpuSchedule& s) {
  if (t < s.phase) return s.phase;
  const SimTime offset = (t - s.phase) % s.period;
  if (offset < s.runtime) return t;
  return t - offset + s.period;
}

SimTime window_end(SimTime t, const CpuSchedule& s) {
  const SimTime offset = (t - s.phase) % s.period;
  return t - offset + s.runtime;
}

Fraction share(const CpuSchedule& s) {
  const std::int64_t g = std::gcd(s.runtime.ns(), s.period.ns());
  return Fraction{s.runtime.ns() / g, s.period.ns() / g};
}

SimTime on_cpu_time(SimTime horizon, const CpuSchedule& s) {
  if (horizon <= s.phase) return SimTime{};
  const SimTime span = horizon - s.phase;
  const std::int64_t full = span / s.period;
  const SimTime rest = span % s.period;
  return s.runtime * full + std::min(rest, s.runtime);
}

}  // namespace bbrsim
