#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "trt/codecs.hpp"
#include "trt/schema.hpp"
#include "trt/types.hpp"

namespace trt {

// Running aggregate of one numeric column. min/max skip NaN and stay empty
// until a comparable value arrives. String columns keep an empty record.
struct ColumnStats {
  std::optional<Value> min;
  std::optional<Value> max;
  double sum = 0.0;

  void add(const Value& v);
  void merge(const ColumnStats& other);

  friend bool operator==(const ColumnStats&, const ColumnStats&) = default;
};

struct BlockIndexEntry {
  std::int64_t start = 0;
  std::int64_t end = 0;
  std::uint64_t offset = 0;   // file offset of the block's length prefix
  std::uint32_t length = 0;   // bytes on disk, prefix and checksum included
  std::uint32_t rows = 0;
  std::uint32_t crc = 0;      // crc32 of the block body
  std::vector<ColumnStats> columns;

  friend bool operator==(const BlockIndexEntry&, const BlockIndexEntry&) = default;
};

// Bytes of framing around a block body: u32 length before, u32 crc32 after.
inline constexpr std::size_t block_framing_bytes = 8;

// The open block: one incremental encoder per column plus the running index
// entry. Appends must be in non-decreasing timestamp order.
class Memtable {
 public:
  explicit Memtable(const SeriesSchema& schema);
  ~Memtable();
  Memtable(Memtable&&) noexcept;
  Memtable& operator=(Memtable&&) noexcept;

  void append(const Row& row);
  // Throws contract_violation if a row is out of order. Empty input is a no-op.
  void append_all(std::span<const Row> rows);

  // Size of the block if it were written now.
  [[nodiscard]] std::size_t encoded_size() const noexcept;
  // Upper bound on how much encoded_size() grows when `row` is appended.
  [[nodiscard]] std::size_t max_append_size(const Row& row) const;

  [[nodiscard]] bool empty() const noexcept { return entry_.rows == 0; }
  [[nodiscard]] std::uint32_t rows() const noexcept { return entry_.rows; }
  // Index entry for the rows so far; offset, length and crc are not set.
  [[nodiscard]] const BlockIndexEntry& entry() const noexcept { return entry_; }

  // Complete block image (framing included). The memtable is unchanged.
  [[nodiscard]] std::vector<std::uint8_t> build() const;
  void clear();

 private:
  struct Columns;

  const SeriesSchema* schema_;
  std::unique_ptr<Columns> cols_;
  BlockIndexEntry entry_;
};

// Decodes a complete block image, verifying framing, checksum, stream tags
// and counts. Any inconsistency is corruption.
[[nodiscard]] std::vector<Row> decode_block(const SeriesSchema& schema, std::span<const std::uint8_t> block);

// Builds an index entry by folding rows (offset/length/crc unset).
[[nodiscard]] BlockIndexEntry summarize(const SeriesSchema& schema, std::span<const Row> rows);

// Serialized size of one index entry for this schema.
[[nodiscard]] std::size_t index_entry_size(const SeriesSchema& schema) noexcept;
void write_index_entry(const SeriesSchema& schema, const BlockIndexEntry& e, std::vector<std::uint8_t>& out);

}  // namespace trt
