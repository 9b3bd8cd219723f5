#include "trt/query/source.hpp"

#include "trt/error.hpp"

namespace trt::query {

std::optional<Value> DataSource::aggregate(std::string_view, std::string_view, AggFn, std::int64_t, std::int64_t) {
  return std::nullopt;
}

SeriesSchema StoreSource::schema(std::string_view series) const { return store_.schema(series); }

bool StoreSource::has_series(std::string_view series) const { return store_.has_series(series); }

std::vector<Row> StoreSource::scan(std::string_view series, std::int64_t start, std::int64_t end) {
  return store_.query_range(series, start, end).collect();
}

std::optional<Value> StoreSource::aggregate(std::string_view series, std::string_view column, AggFn fn,
                                            std::int64_t start, std::int64_t end) {
  return store_.aggregate_range(series, column, fn, start, end);
}

void validate_mapping(const ModelMapping& mapping, const DataSource& source) {
  for (const auto& [node, target] : mapping.bindings) {
    if (!source.has_series(target.series)) {
      fail(Errc::not_found, "binding of " + to_string(node) + " names unknown series '" + target.series + "'");
    }
    if (!target.is_time() && !source.schema(target.series).column_index(target.column)) {
      fail(Errc::not_found, "binding of " + to_string(node) + " names unknown column '" + target.column +
                                "' of series '" + target.series + "'");
    }
  }
}

}  // namespace trt::query
