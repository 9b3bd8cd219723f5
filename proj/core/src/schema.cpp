#include "trt/schema.hpp"

#include <cmath>
#include <set>

#include "trt/error.hpp"

namespace trt {

std::uint32_t IngestConfig::flush_count() const noexcept {
  return static_cast<std::uint32_t>(std::floor(a * static_cast<double>(q)));
}

void IngestConfig::validate() const {
  require(q >= 2, "reorder quantum q must be at least 2");
  require(a > 0.0 && a < 1.0, "flush fraction a must lie in (0, 1)");
  require(flush_count() >= 1, "floor(a * q) must be at least 1");
  require(b_size >= 256, "b_size must be at least 256 bytes");
}

std::optional<std::size_t> SeriesSchema::column_index(std::string_view column) const noexcept {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i].name == column) return i;
  }
  return std::nullopt;
}

std::size_t SeriesSchema::require_column(std::string_view column) const {
  auto idx = column_index(column);
  if (!idx) fail(Errc::not_found, "series '" + name + "' has no column '" + std::string(column) + "'");
  return *idx;
}

void SeriesSchema::validate() const {
  if (!valid_identifier(name)) fail(Errc::contract_violation, "invalid series name '" + name + "'");
  std::set<std::string> seen;
  for (const auto& c : columns) {
    if (!valid_identifier(c.name)) fail(Errc::contract_violation, "invalid column name '" + c.name + "'");
    if (!seen.insert(c.name).second) fail(Errc::contract_violation, "duplicate column '" + c.name + "'");
  }
  require(columns.size() <= 4096, "too many columns");
  ingest.validate();
}

void SeriesSchema::check_row(const Row& row) const {
  if (row.values.size() != columns.size()) {
    fail(Errc::contract_violation, "row has " + std::to_string(row.values.size()) + " values, series '" + name +
                                       "' has " + std::to_string(columns.size()) + " columns");
  }
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (type_of(row.values[i]) != columns[i].type) {
      fail(Errc::contract_violation, "column '" + columns[i].name + "' expects " + to_string(columns[i].type) +
                                         ", got " + to_string(type_of(row.values[i])));
    }
  }
}

bool valid_identifier(std::string_view name) noexcept {
  if (name.empty() || name.size() > 128) return false;
  for (char c : name) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
    if (!ok) return false;
  }
  return true;
}

}  // namespace trt
