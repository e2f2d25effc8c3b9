#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>

namespace pacekit {

// Monetary amounts are fixed-point integers counting micro-currency units
// (1e-6 of one currency unit). Spend accounting stays integral so that
// conservation checks are exact; conversion to double happens only inside
// penalty/eCPC style math.
using Micros = std::int64_t;

inline constexpr Micros kMicrosPerUnit = 1'000'000;

inline Micros micros_from_units(double units) {
  return static_cast<Micros>(std::llround(units * static_cast<double>(kMicrosPerUnit)));
}

inline constexpr double units_from_micros(Micros m) {
  return static_cast<double>(m) / static_cast<double>(kMicrosPerUnit);
}

// Fixed 6-decimal rendering, e.g. 1234500 -> "1.234500". The CSV writers use
// this so money never goes through floating-point formatting.
std::string format_micros(Micros m);

// Floor division with remainder in [0, divisor). Used to spread a surplus
// across slots without creating or losing quanta, also for negative surpluses.
inline constexpr std::pair<Micros, Micros> floor_divmod(Micros value, Micros divisor) {
  Micros q = value / divisor;
  Micros r = value % divisor;
  if (r < 0) {
    q -= 1;
    r += divisor;
  }
  return {q, r};
}

}  // namespace pacekit
