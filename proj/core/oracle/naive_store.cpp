#include "trt/oracle/naive_store.hpp"

#include <algorithm>
#include <cmath>

#include "trt/error.hpp"

namespace trt::oracle {

void NaiveStore::create_series(const SeriesSchema& schema) {
  if (series_.count(schema.name)) fail(Errc::already_exists, "series exists");
  series_.emplace(schema.name, Series{schema, {}});
}

bool NaiveStore::has_series(std::string_view name) const { return series_.find(name) != series_.end(); }

const NaiveStore::Series& NaiveStore::get(std::string_view name) const {
  auto it = series_.find(name);
  if (it == series_.end()) fail(Errc::not_found, "no series " + std::string(name));
  return it->second;
}

const SeriesSchema& NaiveStore::schema(std::string_view name) const { return get(name).schema; }

void NaiveStore::insert(std::string_view name, Row row) {
  auto it = series_.find(name);
  if (it == series_.end()) fail(Errc::not_found, "no series " + std::string(name));
  it->second.rows.push_back(std::move(row));
}

std::vector<Row> NaiveStore::query_range(std::string_view name, std::int64_t start, std::int64_t end) const {
  std::vector<Row> out;
  for (const auto& r : get(name).rows) {
    if (r.timestamp >= start && r.timestamp <= end) out.push_back(r);
  }
  std::stable_sort(out.begin(), out.end(), [](const Row& a, const Row& b) { return a.timestamp < b.timestamp; });
  return out;
}

std::vector<Row> NaiveStore::full_scan(std::string_view name) const {
  return query_range(name, min_time, max_time);
}

std::size_t NaiveStore::row_count(std::string_view name) const { return get(name).rows.size(); }

Value NaiveStore::aggregate(std::string_view name, std::string_view column, AggFn fn, std::int64_t start,
                            std::int64_t end) const {
  const auto& s = get(name);
  const auto col = s.schema.require_column(column);
  const auto type = s.schema.columns[col].type;
  if (type == ColumnType::string) fail(Errc::type_error, "string column");
  auto less = [type](const Value& a, const Value& b) {
    if (type == ColumnType::int64) return std::get<std::int64_t>(a) < std::get<std::int64_t>(b);
    return as_double(a) < as_double(b);
  };
  std::int64_t count = 0;
  double sum = 0;
  const Value* lo = nullptr;
  const Value* hi = nullptr;
  const auto rows = query_range(name, start, end);
  for (const auto& r : rows) {
    const auto& v = r.values[col];
    ++count;
    sum += as_double(v);
    if (type == ColumnType::float64 && std::isnan(std::get<double>(v))) continue;
    if (!lo || less(v, *lo)) lo = &v;
    if (!hi || less(*hi, v)) hi = &v;
  }
  switch (fn) {
    case AggFn::count: return count;
    case AggFn::sum: return sum;
    case AggFn::avg:
      if (count == 0) fail(Errc::empty_aggregate, "empty");
      return sum / static_cast<double>(count);
    case AggFn::min:
      if (!lo) fail(Errc::empty_aggregate, "empty");
      return *lo;
    case AggFn::max:
      if (!hi) fail(Errc::empty_aggregate, "empty");
      return *hi;
  }
  return count;
}

}  // namespace trt::oracle
