#pragma once

#include "bytes.hpp"
#include "trt/block.hpp"

namespace trt::detail {

[[nodiscard]] BlockIndexEntry read_index_entry(const SeriesSchema& schema, ByteReader& in);

[[nodiscard]] std::uint64_t value_to_word(const Value& v);
[[nodiscard]] Value word_to_value(std::uint64_t word, ColumnType type);

}  // namespace trt::detail
