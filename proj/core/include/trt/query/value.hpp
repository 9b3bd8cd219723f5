#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "trt/types.hpp"

namespace trt::query {

// A point in time tagged with the precision of the series it came from.
struct Time {
  std::int64_t ticks = 0;
  TimestampPrecision precision = TimestampPrecision::nanoseconds;

  // Exact identity; use compare_time to compare across precisions.
  friend bool operator==(const Time&, const Time&) = default;
};

struct Null {
  friend bool operator==(Null, Null) = default;
};

// One result cell. Null pads columns a row does not have (union, OPTIONAL).
using Cell = std::variant<Null, double, std::int64_t, bool, std::string, Time>;

[[nodiscard]] bool is_null(const Cell& c) noexcept;
[[nodiscard]] Cell to_cell(const Value& v);
[[nodiscard]] const char* type_name(const Cell& c) noexcept;

// Compares two times after truncating the finer one to the coarser precision.
[[nodiscard]] int compare_time(const Time& a, const Time& b) noexcept;

// Exact identity used by distinct, minus and join keys: same alternative and
// same value (NaN equals NaN, times equal after precision alignment).
[[nodiscard]] bool same_cell(const Cell& a, const Cell& b) noexcept;
// Strict weak order consistent with same_cell, used for sorting and keys.
// Nulls sort first, then by alternative, then by value.
[[nodiscard]] bool cell_less(const Cell& a, const Cell& b) noexcept;

// Text rendering: times as RFC 3339, nulls as empty text.
[[nodiscard]] std::string to_text(const Cell& c);

struct ResultTable {
  std::vector<std::string> columns;  // variable names without '?'
  std::vector<std::vector<Cell>> rows;
  // Row times used to merge unions in time order. Either one per row or
  // empty when the rows carry no time (for example after a plain aggregate).
  std::vector<Time> times;

  [[nodiscard]] bool timed() const noexcept { return !times.empty() || rows.empty(); }

  [[nodiscard]] std::optional<std::size_t> column_index(const std::string& name) const;
};

// Row multisets compare equal ignoring row order.
[[nodiscard]] bool same_rows_unordered(const ResultTable& a, const ResultTable& b);
// Rows compare equal in order.
[[nodiscard]] bool same_rows_ordered(const ResultTable& a, const ResultTable& b);

}  // namespace trt::query
