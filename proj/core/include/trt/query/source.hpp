#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "trt/query/model.hpp"
#include "trt/schema.hpp"
#include "trt/store.hpp"
#include "trt/types.hpp"

namespace trt::query {

// Storage seen by the executor: schemas, inclusive time-range scans and,
// optionally, index-backed aggregates.
class DataSource {
 public:
  virtual ~DataSource() = default;

  [[nodiscard]] virtual SeriesSchema schema(std::string_view series) const = 0;
  [[nodiscard]] virtual bool has_series(std::string_view series) const = 0;
  [[nodiscard]] virtual std::vector<Row> scan(std::string_view series, std::int64_t start, std::int64_t end) = 0;
  // Sources without an aggregate index return nullopt and the executor folds
  // a scan instead. Same conventions as Store::aggregate_range.
  [[nodiscard]] virtual std::optional<Value> aggregate(std::string_view series, std::string_view column, AggFn fn,
                                                       std::int64_t start, std::int64_t end);
};

class StoreSource : public DataSource {
 public:
  explicit StoreSource(Store& store) : store_(store) {}

  [[nodiscard]] SeriesSchema schema(std::string_view series) const override;
  [[nodiscard]] bool has_series(std::string_view series) const override;
  [[nodiscard]] std::vector<Row> scan(std::string_view series, std::int64_t start, std::int64_t end) override;
  [[nodiscard]] std::optional<Value> aggregate(std::string_view series, std::string_view column, AggFn fn,
                                               std::int64_t start, std::int64_t end) override;

 private:
  Store& store_;
};

// Throws not_found naming the first binding whose series or column the
// source does not have.
void validate_mapping(const ModelMapping& mapping, const DataSource& source);

}  // namespace trt::query
