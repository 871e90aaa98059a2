#pragma once

#include <cmath>
#include <cstdint>

namespace hubmod {

// All travel times are stored as whole seconds (fixed point) so that
// feasibility comparisons are exact integer comparisons. Minutes appear
// only at the I/O boundary.
using Seconds = std::int64_t;

inline Seconds minutes_to_seconds(double minutes) {
  return static_cast<Seconds>(std::llround(minutes * 60.0));
}

inline double seconds_to_minutes(Seconds s) { return static_cast<double>(s) / 60.0; }

}  // namespace hubmod
