#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <memory>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "trt/block.hpp"
#include "trt/reorder_buffer.hpp"
#include "trt/schema.hpp"
#include "trt/trtable_file.hpp"

namespace trt {

struct StoreOptions {
  // fdatasync after every block and footer write.
  bool sync = false;
};

struct SeriesStats {
  std::uint64_t rows_accepted = 0;
  std::uint64_t rows_rejected_late = 0;
  std::uint64_t blocks_decoded = 0;
  std::uint64_t index_lookups = 0;
  std::uint64_t flushes = 0;
  std::size_t blocks = 0;
  std::size_t qrb_rows = 0;
  std::size_t memtable_rows = 0;
  std::uint64_t durable_rows = 0;
  std::uint64_t file_bytes = 0;
};

namespace detail {
struct SeriesCounters {
  std::atomic<std::uint64_t> rows_accepted{0};
  std::atomic<std::uint64_t> rows_rejected_late{0};
  std::atomic<std::uint64_t> blocks_decoded{0};
  std::atomic<std::uint64_t> index_lookups{0};
  std::atomic<std::uint64_t> flushes{0};
};
}  // namespace detail

// Forward iterator over a point-in-time snapshot of one series: the indexed
// blocks overlapping the range (decoded one at a time), then the memtable
// image, then the sorted reorder-buffer rows.
class RowCursor {
 public:
  RowCursor() = default;

  bool next(Row& out);
  // Drains the cursor.
  std::vector<Row> collect();

 private:
  friend class Store;

  bool refill();

  std::shared_ptr<const TrTableFile> file_;
  std::shared_ptr<const std::vector<BlockIndexEntry>> index_;
  std::shared_ptr<detail::SeriesCounters> counters_;
  std::int64_t start_ = 0;
  std::int64_t end_ = 0;
  std::size_t next_block_ = 0;
  std::size_t end_block_ = 0;
  std::vector<std::uint8_t> memtable_image_;
  bool memtable_pending_ = false;
  std::vector<Row> qrb_rows_;
  bool qrb_pending_ = false;
  std::vector<Row> buffer_;
  std::size_t pos_ = 0;
};

// A directory of series, one <name>.trt file each. Rows pass through the
// reorder buffer into the memtable and become durable when the memtable is
// flushed as a block. Queries see blocks, memtable and buffer together.
//
// Thread safety: each series has one mutex around its buffer, memtable and
// flush. Inserts to one series must come from one writer; queries may run
// from any thread at any time.
class Store {
 public:
  // Opens or creates the directory. Series whose files cannot be opened are
  // listed by unavailable_series() and fail with corruption when used.
  static std::unique_ptr<Store> open(const std::filesystem::path& dir, StoreOptions options = {});
  ~Store();
  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;

  void create_series(const SeriesSchema& schema);
  [[nodiscard]] bool has_series(std::string_view name) const;
  [[nodiscard]] std::vector<std::string> series_names() const;
  [[nodiscard]] SeriesSchema schema(std::string_view name) const;

  InsertStatus insert(std::string_view series, Row row);
  // Flushes the open block, if any, to the series file.
  void flush_memtable(std::string_view series);
  // Drains the reorder buffer into the memtable and flushes it.
  void flush(std::string_view series);

  [[nodiscard]] RowCursor query_range(std::string_view series, std::int64_t start, std::int64_t end);
  [[nodiscard]] RowCursor full_scan(std::string_view series) { return query_range(series, min_time, max_time); }

  // Combines index aggregates of fully covered blocks with scans of partially
  // covered blocks, the memtable and the buffer. count yields int64, sum and
  // avg yield double, min and max keep the column type. avg/min/max over no
  // rows throw empty_aggregate; strings throw type_error.
  [[nodiscard]] Value aggregate_range(std::string_view series, std::string_view column, AggFn fn,
                                      std::int64_t start, std::int64_t end);

  [[nodiscard]] SeriesStats stats(std::string_view series) const;
  [[nodiscard]] std::vector<BlockIndexEntry> block_index(std::string_view series) const;
  [[nodiscard]] const std::vector<RecoveryReport>& recovery_reports() const noexcept { return reports_; }
  [[nodiscard]] const std::map<std::string, std::string>& unavailable_series() const noexcept { return unavailable_; }
  [[nodiscard]] const std::filesystem::path& directory() const noexcept { return dir_; }

  // Drains and flushes every series. Further writes fail.
  void close();

 private:
  struct Series;

  Store(std::filesystem::path dir, StoreOptions options);
  Series& series(std::string_view name) const;
  void append_to_memtable(Series& s, std::vector<Row>& rows);
  void flush_locked(Series& s);

  std::filesystem::path dir_;
  StoreOptions options_;
  mutable std::shared_mutex mu_;
  std::map<std::string, std::unique_ptr<Series>, std::less<>> series_;
  std::map<std::string, std::string> unavailable_;
  std::vector<RecoveryReport> reports_;
  std::atomic<bool> closed_{false};
};

}  // namespace trt
