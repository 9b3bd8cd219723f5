#include "trt/reorder_buffer.hpp"

#include <algorithm>
#include <iterator>

namespace trt {

void insertion_sort(std::vector<Row>& rows) {
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i - 1].timestamp <= rows[i].timestamp) continue;
    Row moving = std::move(rows[i]);
    std::size_t j = i;
    while (j > 0 && rows[j - 1].timestamp > moving.timestamp) {
      rows[j] = std::move(rows[j - 1]);
      --j;
    }
    rows[j] = std::move(moving);
  }
}

ReorderBuffer::ReorderBuffer(const IngestConfig& config) : config_(config) {
  config_.validate();
  rows_.reserve(config_.q);
}

InsertStatus ReorderBuffer::insert(Row row, std::vector<Row>& flushed) {
  if (t_min_allowed_ && row.timestamp < *t_min_allowed_) return InsertStatus::rejected_late;
  rows_.push_back(std::move(row));
  if (rows_.size() >= config_.q) {
    insertion_sort(rows_);
    const auto n = static_cast<std::ptrdiff_t>(config_.flush_count());
    t_min_allowed_ = rows_[static_cast<std::size_t>(n - 1)].timestamp;
    flushed.insert(flushed.end(), std::make_move_iterator(rows_.begin()), std::make_move_iterator(rows_.begin() + n));
    rows_.erase(rows_.begin(), rows_.begin() + n);
  }
  return InsertStatus::accepted;
}

std::vector<Row> ReorderBuffer::drain() {
  std::vector<Row> out = std::move(rows_);
  rows_.clear();
  std::stable_sort(out.begin(), out.end(), [](const Row& x, const Row& y) { return x.timestamp < y.timestamp; });
  if (!out.empty()) t_min_allowed_ = out.back().timestamp;
  return out;
}

std::vector<Row> ReorderBuffer::snapshot(std::int64_t start, std::int64_t end) const {
  std::vector<Row> out;
  for (const auto& r : rows_) {
    if (r.timestamp >= start && r.timestamp <= end) out.push_back(r);
  }
  std::stable_sort(out.begin(), out.end(), [](const Row& x, const Row& y) { return x.timestamp < y.timestamp; });
  return out;
}

}  // namespace trt
