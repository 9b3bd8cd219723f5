#include "trt/store.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "trt/error.hpp"

namespace trt {

struct Store::Series {
  explicit Series(std::shared_ptr<TrTableFile> f)
      : file(std::move(f)),
        schema(file->schema()),
        qrb(schema.ingest),
        memtable(schema),
        index(std::make_shared<const std::vector<BlockIndexEntry>>(file->index())),
        counters(std::make_shared<detail::SeriesCounters>()) {}

  std::shared_ptr<TrTableFile> file;
  const SeriesSchema schema;
  std::mutex mu;
  ReorderBuffer qrb;
  Memtable memtable;
  std::shared_ptr<const std::vector<BlockIndexEntry>> index;
  std::shared_ptr<detail::SeriesCounters> counters;
};

Store::Store(std::filesystem::path dir, StoreOptions options) : dir_(std::move(dir)), options_(options) {}

Store::~Store() {
  try {
    close();
  } catch (...) {
  }
}

std::unique_ptr<Store> Store::open(const std::filesystem::path& dir, StoreOptions options) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(Errc::io_error, "cannot create store directory '" + dir.string() + "': " + ec.message());
  std::unique_ptr<Store> store(new Store(dir, options));
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".trt") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& path : files) {
    const auto name = path.stem().string();
    RecoveryReport report;
    report.series = name;
    try {
      auto file = TrTableFile::open(path, options.sync, report);
      if (file->schema().name != name) fail(Errc::corruption, "file name does not match series name");
      store->series_.emplace(name, std::make_unique<Series>(std::move(file)));
    } catch (const Error& e) {
      store->unavailable_.emplace(name, e.what());
      report.detail = e.what();
    }
    store->reports_.push_back(std::move(report));
  }
  return store;
}

Store::Series& Store::series(std::string_view name) const {
  std::shared_lock lock(mu_);
  auto it = series_.find(name);
  if (it != series_.end()) return *it->second;
  auto bad = unavailable_.find(std::string(name));
  if (bad != unavailable_.end()) fail(Errc::corruption, "series '" + std::string(name) + "' is unavailable: " + bad->second);
  fail(Errc::not_found, "no series named '" + std::string(name) + "'");
}

void Store::create_series(const SeriesSchema& schema) {
  schema.validate();
  std::unique_lock lock(mu_);
  if (closed_) fail(Errc::contract_violation, "store is closed");
  if (series_.count(schema.name) || unavailable_.count(schema.name)) {
    fail(Errc::already_exists, "series '" + schema.name + "' already exists");
  }
  auto file = TrTableFile::create(dir_ / (schema.name + ".trt"), schema, options_.sync);
  series_.emplace(schema.name, std::make_unique<Series>(std::move(file)));
}

bool Store::has_series(std::string_view name) const {
  std::shared_lock lock(mu_);
  return series_.find(name) != series_.end();
}

std::vector<std::string> Store::series_names() const {
  std::shared_lock lock(mu_);
  std::vector<std::string> out;
  for (const auto& [name, s] : series_) out.push_back(name);
  return out;
}

SeriesSchema Store::schema(std::string_view name) const { return series(name).schema; }

InsertStatus Store::insert(std::string_view name, Row row) {
  auto& s = series(name);
  s.schema.check_row(row);
  // A row that cannot fit an empty block would never be flushable.
  const std::size_t empty_block = block_framing_bytes + EncodedStream::header_size * (s.schema.columns.size() + 1);
  std::lock_guard lock(s.mu);
  if (closed_) fail(Errc::contract_violation, "store is closed");
  if (empty_block + s.memtable.max_append_size(row) > s.schema.ingest.b_size) {
    fail(Errc::contract_violation, "row is too large for b_size " + std::to_string(s.schema.ingest.b_size));
  }
  std::vector<Row> expired;
  const auto status = s.qrb.insert(std::move(row), expired);
  if (status == InsertStatus::rejected_late) {
    s.counters->rows_rejected_late.fetch_add(1, std::memory_order_relaxed);
    return status;
  }
  s.counters->rows_accepted.fetch_add(1, std::memory_order_relaxed);
  if (!expired.empty()) append_to_memtable(s, expired);
  return status;
}

void Store::append_to_memtable(Series& s, std::vector<Row>& rows) {
  const auto cap = s.schema.ingest.b_size;
  for (const auto& r : rows) {
    if (!s.memtable.empty() && s.memtable.encoded_size() + s.memtable.max_append_size(r) > cap) flush_locked(s);
    s.memtable.append(r);
    if (s.memtable.encoded_size() >= cap) flush_locked(s);
  }
}

void Store::flush_locked(Series& s) {
  if (s.memtable.empty()) return;
  const auto image = s.memtable.build();
  s.file->append_block(image, s.memtable.entry());
  s.index = std::make_shared<const std::vector<BlockIndexEntry>>(s.file->index());
  s.memtable.clear();
  s.counters->flushes.fetch_add(1, std::memory_order_relaxed);
}

void Store::flush_memtable(std::string_view name) {
  auto& s = series(name);
  std::lock_guard lock(s.mu);
  flush_locked(s);
}

void Store::flush(std::string_view name) {
  auto& s = series(name);
  std::lock_guard lock(s.mu);
  auto rows = s.qrb.drain();
  append_to_memtable(s, rows);
  flush_locked(s);
}

void Store::close() {
  std::unique_lock lock(mu_);
  if (closed_) return;
  for (auto& [name, s] : series_) {
    std::lock_guard series_lock(s->mu);
    auto rows = s->qrb.drain();
    append_to_memtable(*s, rows);
    flush_locked(*s);
  }
  closed_ = true;
}

namespace {

struct BlockRange {
  std::size_t first;
  std::size_t last;  // exclusive
};

// Blocks overlapping [start, end]. Entries are sorted by start and their ends
// are non-decreasing, so both bounds are binary searches.
BlockRange overlapping(const std::vector<BlockIndexEntry>& index, std::int64_t start, std::int64_t end) {
  auto first = std::lower_bound(index.begin(), index.end(), start,
                                [](const BlockIndexEntry& e, std::int64_t t) { return e.end < t; });
  auto last = std::upper_bound(first, index.end(), end,
                               [](std::int64_t t, const BlockIndexEntry& e) { return t < e.start; });
  return {static_cast<std::size_t>(first - index.begin()), static_cast<std::size_t>(last - index.begin())};
}

bool overlaps(const BlockIndexEntry& e, std::int64_t start, std::int64_t end) {
  return e.rows > 0 && e.end >= start && e.start <= end;
}

bool covers(const BlockIndexEntry& e, std::int64_t start, std::int64_t end) {
  return e.rows > 0 && e.start >= start && e.end <= end;
}

}  // namespace

RowCursor Store::query_range(std::string_view name, std::int64_t start, std::int64_t end) {
  require(start <= end, "query range start must not exceed end");
  auto& s = series(name);
  RowCursor c;
  {
    std::lock_guard lock(s.mu);
    c.index_ = s.index;
    if (overlaps(s.memtable.entry(), start, end)) {
      c.memtable_image_ = s.memtable.build();
      c.memtable_pending_ = true;
    }
    c.qrb_rows_ = s.qrb.snapshot(start, end);
    c.qrb_pending_ = !c.qrb_rows_.empty();
  }
  s.counters->index_lookups.fetch_add(1, std::memory_order_relaxed);
  c.file_ = s.file;
  c.counters_ = s.counters;
  c.start_ = start;
  c.end_ = end;
  const auto range = overlapping(*c.index_, start, end);
  c.next_block_ = range.first;
  c.end_block_ = range.last;
  return c;
}

bool RowCursor::refill() {
  buffer_.clear();
  pos_ = 0;
  while (buffer_.empty()) {
    std::vector<Row> rows;
    if (next_block_ < end_block_) {
      rows = file_->read_rows((*index_)[next_block_++]);
      counters_->blocks_decoded.fetch_add(1, std::memory_order_relaxed);
    } else if (memtable_pending_) {
      memtable_pending_ = false;
      rows = decode_block(file_->schema(), memtable_image_);
      memtable_image_.clear();
    } else if (qrb_pending_) {
      qrb_pending_ = false;
      buffer_ = std::move(qrb_rows_);
      return true;
    } else {
      return false;
    }
    for (auto& r : rows) {
      if (r.timestamp >= start_ && r.timestamp <= end_) buffer_.push_back(std::move(r));
    }
  }
  return true;
}

bool RowCursor::next(Row& out) {
  if (!file_) return false;
  if (pos_ >= buffer_.size() && !refill()) return false;
  out = std::move(buffer_[pos_++]);
  return true;
}

std::vector<Row> RowCursor::collect() {
  std::vector<Row> out;
  Row r;
  while (next(r)) out.push_back(std::move(r));
  return out;
}

Value Store::aggregate_range(std::string_view name, std::string_view column, AggFn fn, std::int64_t start,
                             std::int64_t end) {
  require(start <= end, "aggregate range start must not exceed end");
  auto& s = series(name);
  const auto col = s.schema.require_column(column);
  if (!is_numeric(s.schema.columns[col].type)) {
    fail(Errc::type_error, "cannot aggregate string column '" + std::string(column) + "'");
  }

  std::shared_ptr<const std::vector<BlockIndexEntry>> index;
  BlockIndexEntry mem_entry;
  std::vector<std::uint8_t> mem_image;
  std::vector<Row> qrb_rows;
  {
    std::lock_guard lock(s.mu);
    index = s.index;
    mem_entry = s.memtable.entry();
    if (overlaps(mem_entry, start, end) && !covers(mem_entry, start, end)) mem_image = s.memtable.build();
    qrb_rows = s.qrb.snapshot(start, end);
  }
  s.counters->index_lookups.fetch_add(1, std::memory_order_relaxed);

  std::uint64_t count = 0;
  ColumnStats acc;
  auto fold_rows = [&](const std::vector<Row>& rows) {
    for (const auto& r : rows) {
      if (r.timestamp < start || r.timestamp > end) continue;
      ++count;
      acc.add(r.values[col]);
    }
  };
  auto take_entry = [&](const BlockIndexEntry& e) {
    count += e.rows;
    acc.merge(e.columns[col]);
  };

  const auto range = overlapping(*index, start, end);
  for (std::size_t i = range.first; i < range.last; ++i) {
    const auto& e = (*index)[i];
    if (covers(e, start, end)) {
      take_entry(e);
    } else {
      fold_rows(s.file->read_rows(e));
      s.counters->blocks_decoded.fetch_add(1, std::memory_order_relaxed);
    }
  }
  if (covers(mem_entry, start, end)) {
    take_entry(mem_entry);
  } else if (!mem_image.empty()) {
    fold_rows(decode_block(s.schema, mem_image));
  }
  fold_rows(qrb_rows);

  const auto what = std::string(to_string(fn)) + " of '" + std::string(column) + "'";
  switch (fn) {
    case AggFn::count: return static_cast<std::int64_t>(count);
    case AggFn::sum: return acc.sum;
    case AggFn::avg:
      if (count == 0) fail(Errc::empty_aggregate, what + " over an empty range");
      return acc.sum / static_cast<double>(count);
    case AggFn::min:
      if (!acc.min) fail(Errc::empty_aggregate, what + " over an empty range");
      return *acc.min;
    case AggFn::max:
      if (!acc.max) fail(Errc::empty_aggregate, what + " over an empty range");
      return *acc.max;
  }
  fail(Errc::contract_violation, "unknown aggregate function");
}

SeriesStats Store::stats(std::string_view name) const {
  auto& s = series(name);
  SeriesStats out;
  out.rows_accepted = s.counters->rows_accepted.load();
  out.rows_rejected_late = s.counters->rows_rejected_late.load();
  out.blocks_decoded = s.counters->blocks_decoded.load();
  out.index_lookups = s.counters->index_lookups.load();
  out.flushes = s.counters->flushes.load();
  std::lock_guard lock(s.mu);
  out.blocks = s.index->size();
  for (const auto& e : *s.index) out.durable_rows += e.rows;
  out.qrb_rows = s.qrb.size();
  out.memtable_rows = s.memtable.rows();
  out.file_bytes = s.file->file_size();
  return out;
}

std::vector<BlockIndexEntry> Store::block_index(std::string_view name) const {
  auto& s = series(name);
  std::lock_guard lock(s.mu);
  return *s.index;
}

}  // namespace trt
