#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "trt/schema.hpp"
#include "trt/store.hpp"
#include "trt/types.hpp"

namespace trt::oracle {

// Uncompressed in-memory reference store. Keeps every inserted row in
// arrival order and answers queries by sorting and scanning. No reorder
// window, no blocks, no index.
class NaiveStore {
 public:
  void create_series(const SeriesSchema& schema);
  [[nodiscard]] bool has_series(std::string_view name) const;
  [[nodiscard]] const SeriesSchema& schema(std::string_view name) const;

  void insert(std::string_view series, Row row);

  // Rows with start <= t <= end, stable-sorted by timestamp.
  [[nodiscard]] std::vector<Row> query_range(std::string_view series, std::int64_t start, std::int64_t end) const;
  [[nodiscard]] std::vector<Row> full_scan(std::string_view series) const;
  // Same result conventions as Store::aggregate_range.
  [[nodiscard]] Value aggregate(std::string_view series, std::string_view column, AggFn fn, std::int64_t start,
                                std::int64_t end) const;
  [[nodiscard]] std::size_t row_count(std::string_view series) const;

 private:
  struct Series {
    SeriesSchema schema;
    std::vector<Row> rows;
  };
  const Series& get(std::string_view name) const;

  std::map<std::string, Series, std::less<>> series_;
};

}  // namespace trt::oracle
