#pragma once

#include <cstdint>
#include <numeric>

#include "bbrsim/sim_time.hpp"

namespace bbrsim {

struct Fraction {
  std::int64_t num = 0;
  std::int64_t den = 1;
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  bool operator==(const Fraction&) const = default;
};

// Periodic deadline-style CPU reservation for the sending host. The sender is
// on-CPU during [k*period + phase, k*period + phase + runtime) for k >= 0 and
// off-CPU everywhere else, including before the first window.
struct CpuSchedule {
  SimTime runtime;  // timeslice length
  SimTime period;
  SimTime phase;

  // Throws std::invalid_argument unless 0 < runtime <= period and 0 <= phase < period.
  void validate() const;
};

bool is_on_cpu(SimTime t, const CpuSchedule& s);

// t itself when on-CPU, else the start of the next window.
SimTime next_on_cpu(SimTime t, const CpuSchedule& s);

// End of the window containing t; only meaningful when is_on_cpu(t, s).
SimTime window_end(SimTime t, const CpuSchedule& s);

// runtime/period, reduced.
Fraction share(const CpuSchedule& s);

// Total on-CPU time within [0, horizon).
SimTime on_cpu_time(SimTime horizon, const CpuSchedule& s);

}  // namespace bbrsim
