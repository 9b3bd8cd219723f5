#include <cmath>
#include <zlib.h>

#include "codec_detail.hpp"
#include "format_detail.hpp"
#include "trt/block.hpp"

namespace trt {

namespace detail {

std::uint32_t crc32(std::span<const std::uint8_t> bytes) noexcept {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  std::size_t off = 0;
  while (off < bytes.size()) {
    const auto n = static_cast<uInt>(std::min<std::size_t>(bytes.size() - off, 1u << 30));
    crc = ::crc32(crc, bytes.data() + off, n);
    off += n;
  }
  return static_cast<std::uint32_t>(crc);
}

std::uint64_t value_to_word(const Value& v) {
  switch (type_of(v)) {
    case ColumnType::float64: return std::bit_cast<std::uint64_t>(std::get<double>(v));
    case ColumnType::int64: return static_cast<std::uint64_t>(std::get<std::int64_t>(v));
    case ColumnType::boolean: return std::get<bool>(v) ? 1 : 0;
    case ColumnType::string: break;
  }
  fail(Errc::type_error, "string value has no word form");
}

Value word_to_value(std::uint64_t word, ColumnType type) {
  switch (type) {
    case ColumnType::float64: return std::bit_cast<double>(word);
    case ColumnType::int64: return static_cast<std::int64_t>(word);
    case ColumnType::boolean:
      if (word > 1) fail(Errc::corruption, "boolean column holds a value other than 0 or 1");
      return word == 1;
    case ColumnType::string: break;
  }
  fail(Errc::corruption, "string column has no word form");
}

BlockIndexEntry read_index_entry(const SeriesSchema& schema, ByteReader& in) {
  BlockIndexEntry e;
  e.start = in.le<std::int64_t>();
  e.end = in.le<std::int64_t>();
  e.offset = in.le<std::uint64_t>();
  e.length = in.le<std::uint32_t>();
  e.rows = in.le<std::uint32_t>();
  e.crc = in.le<std::uint32_t>();
  e.columns.resize(schema.columns.size());
  for (std::size_t c = 0; c < schema.columns.size(); ++c) {
    const auto type = schema.columns[c].type;
    if (!is_numeric(type)) continue;
    const auto flags = in.u8();
    const auto min = in.le<std::uint64_t>();
    const auto max = in.le<std::uint64_t>();
    e.columns[c].sum = in.f64();
    if (flags > 1) fail(Errc::corruption, "bad index entry flags");
    if (flags == 1) {
      e.columns[c].min = word_to_value(min, type);
      e.columns[c].max = word_to_value(max, type);
    }
  }
  if (e.rows == 0 || e.end < e.start) fail(Errc::corruption, "inconsistent index entry");
  return e;
}

}  // namespace detail

namespace {

bool less_than(const Value& a, const Value& b) {
  switch (type_of(a)) {
    case ColumnType::float64: return std::get<double>(a) < std::get<double>(b);
    case ColumnType::int64: return std::get<std::int64_t>(a) < std::get<std::int64_t>(b);
    case ColumnType::boolean: return !std::get<bool>(a) && std::get<bool>(b);
    case ColumnType::string: return std::get<std::string>(a) < std::get<std::string>(b);
  }
  return false;
}

bool is_nan(const Value& v) { return type_of(v) == ColumnType::float64 && std::isnan(std::get<double>(v)); }

std::size_t bits_to_bytes(std::uint64_t bits) { return static_cast<std::size_t>((bits + 7) / 8); }

// Skips the zero padding after a bit-packed payload; returns bytes consumed.
std::size_t finish_payload(BitReader& r) {
  const unsigned pad = static_cast<unsigned>((8 - r.position() % 8) % 8);
  if (pad != 0 && r.read_bits(pad) != 0) fail(Errc::corruption, "nonzero padding after stream payload");
  return static_cast<std::size_t>(r.position() / 8);
}

}  // namespace

void ColumnStats::add(const Value& v) {
  if (type_of(v) == ColumnType::string) return;
  sum += as_double(v);
  if (is_nan(v)) return;
  if (!min || less_than(v, *min)) min = v;
  if (!max || less_than(*max, v)) max = v;
}

void ColumnStats::merge(const ColumnStats& other) {
  sum += other.sum;
  if (other.min && (!min || less_than(*other.min, *min))) min = other.min;
  if (other.max && (!max || less_than(*max, *other.max))) max = other.max;
}

// ---------------------------------------------------------------------------

struct Memtable::Columns {
  std::unique_ptr<TimestampEncoder> ts;
  std::vector<std::unique_ptr<ValueEncoder>> values;  // null for string columns
  std::vector<std::vector<std::uint8_t>> strings;     // raw payloads of string columns
};

Memtable::Memtable(const SeriesSchema& schema) : schema_(&schema), cols_(std::make_unique<Columns>()) { clear(); }
Memtable::~Memtable() = default;
Memtable::Memtable(Memtable&&) noexcept = default;
Memtable& Memtable::operator=(Memtable&&) noexcept = default;

void Memtable::clear() {
  cols_->ts = make_timestamp_encoder(schema_->ts_codec, schema_->precision);
  cols_->values.clear();
  cols_->strings.assign(schema_->columns.size(), {});
  for (const auto& c : schema_->columns) {
    cols_->values.push_back(is_numeric(c.type) ? make_value_encoder(schema_->val_codec) : nullptr);
  }
  entry_ = BlockIndexEntry{};
  entry_.columns.resize(schema_->columns.size());
}

void Memtable::append(const Row& row) {
  schema_->check_row(row);
  if (!empty() && row.timestamp < entry_.end) fail(Errc::contract_violation, "memtable rows must be sorted");
  cols_->ts->append(row.timestamp);
  for (std::size_t c = 0; c < row.values.size(); ++c) {
    const auto& v = row.values[c];
    if (cols_->values[c]) {
      cols_->values[c]->append(detail::value_to_word(v));
    } else {
      const auto& s = std::get<std::string>(v);
      detail::put_le(cols_->strings[c], static_cast<std::uint32_t>(s.size()));
      cols_->strings[c].insert(cols_->strings[c].end(), s.begin(), s.end());
    }
    entry_.columns[c].add(v);
  }
  if (entry_.rows == 0) entry_.start = row.timestamp;
  entry_.end = row.timestamp;
  ++entry_.rows;
}

void Memtable::append_all(std::span<const Row> rows) {
  for (const auto& r : rows) append(r);
}

std::size_t Memtable::encoded_size() const noexcept {
  std::size_t n = block_framing_bytes + EncodedStream::header_size + bits_to_bytes(cols_->ts->payload_bits());
  for (std::size_t c = 0; c < cols_->values.size(); ++c) {
    n += EncodedStream::header_size;
    n += cols_->values[c] ? bits_to_bytes(cols_->values[c]->payload_bits()) : cols_->strings[c].size();
  }
  return n;
}

std::size_t Memtable::max_append_size(const Row& row) const {
  schema_->check_row(row);
  std::size_t n = bits_to_bytes(cols_->ts->max_append_bits());
  for (std::size_t c = 0; c < cols_->values.size(); ++c) {
    n += cols_->values[c] ? bits_to_bytes(cols_->values[c]->max_append_bits())
                          : 4 + std::get<std::string>(row.values[c]).size();
  }
  return n;
}

std::vector<std::uint8_t> Memtable::build() const {
  std::vector<std::uint8_t> out;
  out.reserve(encoded_size());
  detail::put_le<std::uint32_t>(out, 0);  // length, patched below
  cols_->ts->finish().append_to(out);
  for (std::size_t c = 0; c < cols_->values.size(); ++c) {
    if (cols_->values[c]) {
      cols_->values[c]->finish().append_to(out);
    } else {
      detail::put_u8(out, static_cast<std::uint8_t>(StreamTag::raw_strings));
      detail::put_le(out, entry_.rows);
      out.insert(out.end(), cols_->strings[c].begin(), cols_->strings[c].end());
    }
  }
  const auto body_len = static_cast<std::uint32_t>(out.size() - 4);
  for (int i = 0; i < 4; ++i) out[i] = static_cast<std::uint8_t>(body_len >> (8 * i));
  const auto crc = detail::crc32(std::span<const std::uint8_t>(out).subspan(4));
  detail::put_le(out, crc);
  return out;
}

// ---------------------------------------------------------------------------

std::vector<Row> decode_block(const SeriesSchema& schema, std::span<const std::uint8_t> block) {
  detail::ByteReader framed(block);
  const auto body_len = framed.le<std::uint32_t>();
  const auto body = framed.take(body_len);
  const auto crc = framed.le<std::uint32_t>();
  if (framed.remaining() != 0) fail(Errc::corruption, "block length does not match its framing");
  if (detail::crc32(body) != crc) fail(Errc::corruption, "block checksum mismatch");

  detail::ByteReader in(body);
  const auto ts_tag = static_cast<StreamTag>(in.u8());
  if (ts_tag != stream_tag(schema.ts_codec)) fail(Errc::corruption, "unexpected timestamp stream tag");
  const auto rows = in.le<std::uint32_t>();
  if (rows == 0) fail(Errc::corruption, "empty block");
  std::vector<std::int64_t> ts;
  {
    BitReader r(in.rest());
    ts = decode_ts_payload(ts_tag, r, rows, schema.precision);
    in.skip(finish_payload(r));
  }
  std::vector<Row> out(rows);
  for (std::uint32_t i = 0; i < rows; ++i) {
    out[i].timestamp = ts[i];
    out[i].values.reserve(schema.columns.size());
  }
  for (const auto& col : schema.columns) {
    const auto tag = static_cast<StreamTag>(in.u8());
    const auto count = in.le<std::uint32_t>();
    if (count != rows) fail(Errc::corruption, "column stream count differs from row count");
    if (is_numeric(col.type)) {
      if (tag != stream_tag(schema.val_codec)) fail(Errc::corruption, "unexpected value stream tag");
      BitReader r(in.rest());
      auto words = decode_val_payload(tag, r, count);
      in.skip(finish_payload(r));
      for (std::uint32_t i = 0; i < rows; ++i) out[i].values.push_back(detail::word_to_value(words[i], col.type));
    } else {
      if (tag != StreamTag::raw_strings) fail(Errc::corruption, "unexpected string stream tag");
      for (std::uint32_t i = 0; i < rows; ++i) {
        const auto len = in.le<std::uint32_t>();
        const auto bytes = in.take(len);
        out[i].values.emplace_back(std::string(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
      }
    }
  }
  if (in.remaining() != 0) fail(Errc::corruption, "trailing bytes in block");
  return out;
}

BlockIndexEntry summarize(const SeriesSchema& schema, std::span<const Row> rows) {
  BlockIndexEntry e;
  e.columns.resize(schema.columns.size());
  for (const auto& r : rows) {
    if (e.rows == 0) e.start = r.timestamp;
    e.end = r.timestamp;
    ++e.rows;
    for (std::size_t c = 0; c < r.values.size() && c < e.columns.size(); ++c) e.columns[c].add(r.values[c]);
  }
  return e;
}

std::size_t index_entry_size(const SeriesSchema& schema) noexcept {
  std::size_t n = 8 + 8 + 8 + 4 + 4 + 4;
  for (const auto& c : schema.columns) {
    if (is_numeric(c.type)) n += 1 + 8 + 8 + 8;
  }
  return n;
}

void write_index_entry(const SeriesSchema& schema, const BlockIndexEntry& e, std::vector<std::uint8_t>& out) {
  detail::put_le(out, e.start);
  detail::put_le(out, e.end);
  detail::put_le(out, e.offset);
  detail::put_le(out, e.length);
  detail::put_le(out, e.rows);
  detail::put_le(out, e.crc);
  for (std::size_t c = 0; c < schema.columns.size(); ++c) {
    if (!is_numeric(schema.columns[c].type)) continue;
    const auto& s = e.columns[c];
    const bool has = s.min.has_value() && s.max.has_value();
    detail::put_u8(out, has ? 1 : 0);
    detail::put_le<std::uint64_t>(out, has ? detail::value_to_word(*s.min) : 0);
    detail::put_le<std::uint64_t>(out, has ? detail::value_to_word(*s.max) : 0);
    detail::put_f64(out, s.sum);
  }
}

}  // namespace trt
