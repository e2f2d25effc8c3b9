#include "pacekit/money.hpp"

#include <cstdio>

namespace pacekit {

std::string format_micros(Micros m) {
  bool negative = m < 0;
  // Careful with INT64_MIN: negate in unsigned space.
  unsigned long long abs_value =
      negative ? ~static_cast<unsigned long long>(m) + 1ULL
               : static_cast<unsigned long long>(m);
  unsigned long long whole = abs_value / kMicrosPerUnit;
  unsigned long long frac = abs_value % kMicrosPerUnit;
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%s%llu.%06llu", negative ? "-" : "", whole, frac);
  return buf;
}

}  // namespace pacekit
