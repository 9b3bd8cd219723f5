#pragma once

#include "trt/oracle/naive_store.hpp"
#include "trt/query/source.hpp"

namespace trt::oracle {

// Query source over the naive store. It has no aggregate index, so the
// executor always folds scans.
class NaiveSource : public query::DataSource {
 public:
  explicit NaiveSource(const NaiveStore& store) : store_(store) {}

  [[nodiscard]] SeriesSchema schema(std::string_view series) const override { return store_.schema(series); }
  [[nodiscard]] bool has_series(std::string_view series) const override { return store_.has_series(series); }
  [[nodiscard]] std::vector<Row> scan(std::string_view series, std::int64_t start, std::int64_t end) override {
    return store_.query_range(series, start, end);
  }

 private:
  const NaiveStore& store_;
};

}  // namespace trt::oracle
