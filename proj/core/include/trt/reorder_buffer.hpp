#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "trt/schema.hpp"
#include "trt/types.hpp"

namespace trt {

enum class InsertStatus { accepted, rejected_late };

// Quantum re-ordering buffer. Rows accumulate unsorted; when q rows are held
// they are insertion-sorted (stable on timestamp) and the first floor(a*q)
// leave the buffer. Afterwards rows older than the newest flushed timestamp
// are rejected as late.
class ReorderBuffer {
 public:
  explicit ReorderBuffer(const IngestConfig& config);

  // Appends the row unless it is late. Expired rows, in timestamp order, are
  // appended to `flushed`.
  InsertStatus insert(Row row, std::vector<Row>& flushed);

  // Removes and returns every held row, sorted.
  std::vector<Row> drain();

  // Sorted copy of the held rows with start <= t <= end.
  [[nodiscard]] std::vector<Row> snapshot(std::int64_t start, std::int64_t end) const;

  // Minimum allowed timestamp; empty until the first expiry.
  [[nodiscard]] std::optional<std::int64_t> min_allowed() const noexcept { return t_min_allowed_; }
  [[nodiscard]] std::size_t size() const noexcept { return rows_.size(); }
  [[nodiscard]] bool empty() const noexcept { return rows_.empty(); }
  [[nodiscard]] const IngestConfig& config() const noexcept { return config_; }

 private:
  IngestConfig config_;
  std::vector<Row> rows_;
  std::optional<std::int64_t> t_min_allowed_;
};

// Stable in-place insertion sort on timestamp. Cheap on nearly sorted input.
void insertion_sort(std::vector<Row>& rows);

}  // namespace trt
