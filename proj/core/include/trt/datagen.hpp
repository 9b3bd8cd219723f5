#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "trt/schema.hpp"
#include "trt/types.hpp"

namespace trt {

// Seeded synthetic datasets shaped after three public IoT datasets:
//   srbench-like    periodic seconds, six one-decimal weather floats
//   shelburne-like  10 s period at nanosecond precision with jitter, six
//                   full-precision sensor floats
//   taxi-like       dense uneven seconds with duplicate timestamps, mixed
//                   int/float/bool trip fields
struct GenOptions {
  std::size_t rows = 10000;
  std::uint64_t seed = 42;
  std::string series;                        // default: preset name with '_'
  std::optional<TimestampPrecision> precision;
  std::optional<std::int64_t> period;        // in precision ticks
  std::optional<std::int64_t> jitter;        // max deviation, ticks
  std::optional<double> duplicate_rate;      // taxi-like only
  std::optional<std::size_t> columns;        // value columns, presets cycle types
  std::int64_t start = 1049155200;           // seconds since epoch (2003-04-01)
};

struct Dataset {
  SeriesSchema schema;
  std::vector<Row> rows;  // sorted by timestamp
};

[[nodiscard]] std::vector<std::string> generator_names();
// Throws contract_violation for unknown presets.
[[nodiscard]] Dataset generate(std::string_view preset, const GenOptions& options);

// Reorders rows so that none moves `window` or more positions away from its
// input position: the input is cut into consecutive chunks of `window` rows
// and each chunk is shuffled. window <= 1 leaves the rows untouched.
void bounded_shuffle(std::vector<Row>& rows, std::size_t window, std::uint64_t seed);

}  // namespace trt
