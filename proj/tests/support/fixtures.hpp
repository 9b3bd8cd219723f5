#pragma once

#include <cmath>
#include <cstring>
#include <random>
#include <string>
#include <vector>

#include "trt/block.hpp"
#include "trt/schema.hpp"
#include "trt/types.hpp"

namespace trt::testing {

// One column of every type.
inline SeriesSchema mixed_schema(const std::string& name = "mixed") {
  SeriesSchema s;
  s.name = name;
  s.precision = TimestampPrecision::milliseconds;
  s.columns = {{"temp", ColumnType::float64},
               {"count", ColumnType::int64},
               {"flag", ColumnType::boolean},
               {"label", ColumnType::string}};
  return s;
}

// Non-decreasing timestamps with occasional duplicates and NaN values.
inline std::vector<Row> mixed_rows(std::size_t n, std::uint64_t seed, std::int64_t start = 1'000'000) {
  std::mt19937_64 rng(seed);
  std::vector<Row> rows;
  std::int64_t t = start;
  double temp = 20.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (rng() % 5 != 0) t += static_cast<std::int64_t>(1 + rng() % 2000);
    temp += std::normal_distribution<double>(0, 0.5)(rng);
    const double v = rng() % 97 == 0 ? std::nan("") : std::round(temp * 100) / 100;
    rows.push_back(Row{t,
                       {Value{v}, Value{static_cast<std::int64_t>(rng() % 1000) - 500}, Value{rng() % 2 == 0},
                        Value{"s" + std::to_string(rng() % 17)}}});
  }
  return rows;
}

inline SeriesSchema float_schema(const std::string& name, std::size_t columns) {
  SeriesSchema s;
  s.name = name;
  s.precision = TimestampPrecision::seconds;
  for (std::size_t c = 0; c < columns; ++c) s.columns.push_back({"c" + std::to_string(c), ColumnType::float64});
  return s;
}

// Rows compare equal when timestamps match and values are bitwise equal
// (so NaN payloads count as equal to themselves).
inline bool same_rows(const std::vector<Row>& a, const std::vector<Row>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].timestamp != b[i].timestamp || a[i].values.size() != b[i].values.size()) return false;
    for (std::size_t c = 0; c < a[i].values.size(); ++c) {
      const auto& x = a[i].values[c];
      const auto& y = b[i].values[c];
      if (x.index() != y.index()) return false;
      if (const auto* dx = std::get_if<double>(&x)) {
        const double dy = std::get<double>(y);
        if (std::memcmp(dx, &dy, sizeof dy) != 0) return false;
      } else if (x != y) {
        return false;
      }
    }
  }
  return true;
}

// Index entries compare equal when their aggregates match bitwise.
inline bool same_entries(const std::vector<BlockIndexEntry>& a, const std::vector<BlockIndexEntry>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& x = a[i];
    const auto& y = b[i];
    if (x.start != y.start || x.end != y.end || x.offset != y.offset || x.length != y.length ||
        x.rows != y.rows || x.crc != y.crc || x.columns.size() != y.columns.size()) {
      return false;
    }
    for (std::size_t c = 0; c < x.columns.size(); ++c) {
      if (x.columns[c].min != y.columns[c].min || x.columns[c].max != y.columns[c].max ||
          std::memcmp(&x.columns[c].sum, &y.columns[c].sum, sizeof(double)) != 0) {
        return false;
      }
    }
  }
  return true;
}

}  // namespace trt::testing
