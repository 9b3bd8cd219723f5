#include "trt/types.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>

#include "trt/error.hpp"

namespace trt {

std::int64_t ticks_per_second(TimestampPrecision p) noexcept {
  switch (p) {
    case TimestampPrecision::seconds: return 1;
    case TimestampPrecision::milliseconds: return 1'000;
    case TimestampPrecision::nanoseconds: return 1'000'000'000;
  }
  return 1;
}

const char* to_string(TimestampPrecision p) noexcept {
  switch (p) {
    case TimestampPrecision::seconds: return "s";
    case TimestampPrecision::milliseconds: return "ms";
    case TimestampPrecision::nanoseconds: return "ns";
  }
  return "?";
}

TimestampPrecision parse_precision(std::string_view text) {
  if (text == "s" || text == "seconds") return TimestampPrecision::seconds;
  if (text == "ms" || text == "milliseconds") return TimestampPrecision::milliseconds;
  if (text == "ns" || text == "nanoseconds") return TimestampPrecision::nanoseconds;
  fail(Errc::contract_violation, "unknown timestamp precision '" + std::string(text) + "'");
}

const char* to_string(ColumnType t) noexcept {
  switch (t) {
    case ColumnType::float64: return "float64";
    case ColumnType::int64: return "int64";
    case ColumnType::boolean: return "bool";
    case ColumnType::string: return "string";
  }
  return "?";
}

ColumnType parse_column_type(std::string_view text) {
  if (text == "float64" || text == "double" || text == "float") return ColumnType::float64;
  if (text == "int64" || text == "int" || text == "long") return ColumnType::int64;
  if (text == "bool" || text == "boolean") return ColumnType::boolean;
  if (text == "string" || text == "str") return ColumnType::string;
  fail(Errc::contract_violation, "unknown column type '" + std::string(text) + "'");
}

ColumnType type_of(const Value& v) noexcept { return static_cast<ColumnType>(v.index()); }

double as_double(const Value& v) {
  switch (type_of(v)) {
    case ColumnType::float64: return std::get<double>(v);
    case ColumnType::int64: return static_cast<double>(std::get<std::int64_t>(v));
    case ColumnType::boolean: return std::get<bool>(v) ? 1.0 : 0.0;
    case ColumnType::string: break;
  }
  fail(Errc::type_error, "string value used as a number");
}

std::string to_string(const Value& v) {
  switch (type_of(v)) {
    case ColumnType::float64: {
      char buf[64];
      auto [end, ec] = std::to_chars(buf, buf + sizeof buf, std::get<double>(v));
      return std::string(buf, end);
    }
    case ColumnType::int64: return std::to_string(std::get<std::int64_t>(v));
    case ColumnType::boolean: return std::get<bool>(v) ? "true" : "false";
    case ColumnType::string: return std::get<std::string>(v);
  }
  return {};
}

const char* to_string(AggFn fn) noexcept {
  switch (fn) {
    case AggFn::count: return "count";
    case AggFn::sum: return "sum";
    case AggFn::avg: return "avg";
    case AggFn::min: return "min";
    case AggFn::max: return "max";
  }
  return "?";
}

AggFn parse_agg_fn(std::string_view name) {
  std::string lower(name);
  for (auto& ch : lower) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  if (lower == "count") return AggFn::count;
  if (lower == "sum") return AggFn::sum;
  if (lower == "avg" || lower == "mean") return AggFn::avg;
  if (lower == "min") return AggFn::min;
  if (lower == "max") return AggFn::max;
  fail(Errc::contract_violation, "unknown aggregate function '" + std::string(name) + "'");
}

}  // namespace trt
