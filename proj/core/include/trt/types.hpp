#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace trt {

enum class TimestampPrecision : std::uint8_t { seconds = 0, milliseconds = 1, nanoseconds = 2 };

[[nodiscard]] std::int64_t ticks_per_second(TimestampPrecision p) noexcept;
[[nodiscard]] const char* to_string(TimestampPrecision p) noexcept;
// Accepts "s", "ms", "ns" and the long names.
[[nodiscard]] TimestampPrecision parse_precision(std::string_view text);

enum class ColumnType : std::uint8_t { float64 = 0, int64 = 1, boolean = 2, string = 3 };

[[nodiscard]] const char* to_string(ColumnType t) noexcept;
[[nodiscard]] ColumnType parse_column_type(std::string_view text);
[[nodiscard]] constexpr bool is_numeric(ColumnType t) noexcept { return t != ColumnType::string; }

// A stored column value. Alternative order matches ColumnType.
using Value = std::variant<double, std::int64_t, bool, std::string>;

[[nodiscard]] ColumnType type_of(const Value& v) noexcept;
// Numeric view of a non-string value (bool as 0/1).
[[nodiscard]] double as_double(const Value& v);
[[nodiscard]] std::string to_string(const Value& v);

enum class AggFn { count, sum, avg, min, max };
[[nodiscard]] const char* to_string(AggFn fn) noexcept;
// Accepts the names above case-insensitively plus "mean".
[[nodiscard]] AggFn parse_agg_fn(std::string_view name);

inline constexpr std::int64_t min_time = std::numeric_limits<std::int64_t>::min();
inline constexpr std::int64_t max_time = std::numeric_limits<std::int64_t>::max();

struct Row {
  std::int64_t timestamp = 0;
  std::vector<Value> values;

  friend bool operator==(const Row&, const Row&) = default;
};

}  // namespace trt
