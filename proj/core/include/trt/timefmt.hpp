#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "trt/types.hpp"

namespace trt {

struct ParsedTime {
  std::int64_t ticks = 0;
  // The text carried sub-tick digits that were dropped.
  bool truncated = false;
};

// Accepts YYYY-MM-DD[T| ]hh:mm:ss[.fraction][Z|+hh:mm|-hh:mm]. A missing
// offset means UTC. Fractions finer than the precision are truncated toward
// negative infinity.
[[nodiscard]] ParsedTime parse_rfc3339(std::string_view text, TimestampPrecision precision);

// Either an integer tick count or RFC 3339 text.
[[nodiscard]] ParsedTime parse_timestamp(std::string_view text, TimestampPrecision precision);

// UTC, with as many fraction digits as the precision carries.
[[nodiscard]] std::string format_rfc3339(std::int64_t ticks, TimestampPrecision precision);

// Rescales a tick count between precisions, flooring when the target is coarser.
[[nodiscard]] std::int64_t convert_ticks(std::int64_t ticks, TimestampPrecision from, TimestampPrecision to);

}  // namespace trt
