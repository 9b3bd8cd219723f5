#include "trt/query/value.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "trt/timefmt.hpp"

namespace trt::query {

bool is_null(const Cell& c) noexcept { return std::holds_alternative<Null>(c); }

Cell to_cell(const Value& v) {
  return std::visit([](const auto& x) -> Cell { return x; }, v);
}

const char* type_name(const Cell& c) noexcept {
  switch (c.index()) {
    case 0: return "null";
    case 1: return "float64";
    case 2: return "int64";
    case 3: return "bool";
    case 4: return "string";
    default: return "time";
  }
}

int compare_time(const Time& a, const Time& b) noexcept {
  std::int64_t x = a.ticks;
  std::int64_t y = b.ticks;
  if (a.precision != b.precision) {
    const auto coarse = ticks_per_second(a.precision) < ticks_per_second(b.precision) ? a.precision : b.precision;
    x = convert_ticks(x, a.precision, coarse);
    y = convert_ticks(y, b.precision, coarse);
  }
  return x < y ? -1 : (x > y ? 1 : 0);
}

bool same_cell(const Cell& a, const Cell& b) noexcept {
  if (a.index() != b.index()) return false;
  if (const auto* x = std::get_if<double>(&a)) {
    const double y = std::get<double>(b);
    return (std::isnan(*x) && std::isnan(y)) || *x == y;
  }
  if (const auto* t = std::get_if<Time>(&a)) return compare_time(*t, std::get<Time>(b)) == 0;
  return a == b;
}

bool cell_less(const Cell& a, const Cell& b) noexcept {
  if (a.index() != b.index()) return a.index() < b.index();
  switch (a.index()) {
    case 0: return false;
    case 1: {
      const double x = std::get<double>(a);
      const double y = std::get<double>(b);
      if (std::isnan(x) || std::isnan(y)) return !std::isnan(x) && std::isnan(y);
      return x < y;
    }
    case 2: return std::get<std::int64_t>(a) < std::get<std::int64_t>(b);
    case 3: return !std::get<bool>(a) && std::get<bool>(b);
    case 4: return std::get<std::string>(a) < std::get<std::string>(b);
    default: return compare_time(std::get<Time>(a), std::get<Time>(b)) < 0;
  }
}

std::string to_text(const Cell& c) {
  switch (c.index()) {
    case 0: return {};
    case 1: return to_string(Value{std::get<double>(c)});
    case 2: return std::to_string(std::get<std::int64_t>(c));
    case 3: return std::get<bool>(c) ? "true" : "false";
    case 4: return std::get<std::string>(c);
    default: {
      const auto& t = std::get<Time>(c);
      return format_rfc3339(t.ticks, t.precision);
    }
  }
}

std::optional<std::size_t> ResultTable::column_index(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) return std::nullopt;
  return static_cast<std::size_t>(it - columns.begin());
}

namespace {

bool row_less(const std::vector<Cell>& a, const std::vector<Cell>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(), cell_less);
}

bool row_same(const std::vector<Cell>& a, const std::vector<Cell>& b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), same_cell);
}

}  // namespace

bool same_rows_ordered(const ResultTable& a, const ResultTable& b) {
  return a.columns == b.columns && a.rows.size() == b.rows.size() &&
         std::equal(a.rows.begin(), a.rows.end(), b.rows.begin(), row_same);
}

bool same_rows_unordered(const ResultTable& a, const ResultTable& b) {
  if (a.columns != b.columns || a.rows.size() != b.rows.size()) return false;
  auto x = a.rows;
  auto y = b.rows;
  std::sort(x.begin(), x.end(), row_less);
  std::sort(y.begin(), y.end(), row_less);
  return std::equal(x.begin(), x.end(), y.begin(), row_same);
}

}  // namespace trt::query
