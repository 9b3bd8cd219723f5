#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "trt/codecs.hpp"
#include "trt/types.hpp"

namespace trt {

struct ColumnSpec {
  std::string name;
  ColumnType type = ColumnType::float64;

  friend bool operator==(const ColumnSpec&, const ColumnSpec&) = default;
};

// Reorder buffer and block sizing. Defaults: q = 2048 rows, a = 2/3,
// b_size = 64 KiB.
struct IngestConfig {
  std::uint32_t q = 2048;
  double a = 2.0 / 3.0;
  std::uint32_t b_size = 65536;

  // Rows moved out of the reorder buffer per expiry: floor(a * q).
  [[nodiscard]] std::uint32_t flush_count() const noexcept;
  // Throws contract_violation unless q >= 2, 0 < a < 1, floor(a*q) >= 1 and
  // b_size is large enough for an empty block.
  void validate() const;

  friend bool operator==(const IngestConfig&, const IngestConfig&) = default;
};

struct SeriesSchema {
  std::string name;
  TimestampPrecision precision = TimestampPrecision::milliseconds;
  std::vector<ColumnSpec> columns;
  TsCodec ts_codec = TsCodec::dod;
  ValCodec val_codec = ValCodec::gorilla;
  IngestConfig ingest;

  [[nodiscard]] std::optional<std::size_t> column_index(std::string_view column) const noexcept;
  // Like column_index but throws not_found.
  [[nodiscard]] std::size_t require_column(std::string_view column) const;
  // Throws contract_violation on bad names, duplicate columns or bad config.
  void validate() const;
  // Throws contract_violation unless the row has the schema's arity and types.
  void check_row(const Row& row) const;

  friend bool operator==(const SeriesSchema&, const SeriesSchema&) = default;
};

// Series and column names: letters, digits, '_' and '-', 1 to 128 chars.
[[nodiscard]] bool valid_identifier(std::string_view name) noexcept;

}  // namespace trt
