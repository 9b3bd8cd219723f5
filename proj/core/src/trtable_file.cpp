#include "trt/trtable_file.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "format_detail.hpp"

namespace trt {

namespace {

constexpr char kHeaderMagic[4] = {'T', 'R', 'T', 'N'};
constexpr char kLocatorMagic[4] = {'T', 'R', 'T', 'F'};
// magic, version, header length
constexpr std::size_t kHeaderPrefix = 4 + 2 + 4;

[[noreturn]] void io_fail(const std::string& what, const std::filesystem::path& path) {
  fail(Errc::io_error, what + " '" + path.string() + "': " + std::strerror(errno));
}

void pread_all(int fd, std::uint8_t* buf, std::size_t n, std::uint64_t offset, const std::filesystem::path& path) {
  while (n > 0) {
    const ssize_t got = ::pread(fd, buf, n, static_cast<off_t>(offset));
    if (got < 0) {
      if (errno == EINTR) continue;
      io_fail("read failed", path);
    }
    if (got == 0) fail(Errc::corruption, "unexpected end of file in '" + path.string() + "'");
    buf += got;
    n -= static_cast<std::size_t>(got);
    offset += static_cast<std::uint64_t>(got);
  }
}

void pwrite_all(int fd, const std::uint8_t* buf, std::size_t n, std::uint64_t offset,
                const std::filesystem::path& path) {
  while (n > 0) {
    const ssize_t put = ::pwrite(fd, buf, n, static_cast<off_t>(offset));
    if (put < 0) {
      if (errno == EINTR) continue;
      io_fail("write failed", path);
    }
    buf += put;
    n -= static_cast<std::size_t>(put);
    offset += static_cast<std::uint64_t>(put);
  }
}

std::vector<std::uint8_t> read_range(int fd, std::uint64_t offset, std::size_t n, const std::filesystem::path& path) {
  std::vector<std::uint8_t> buf(n);
  pread_all(fd, buf.data(), n, offset, path);
  return buf;
}

SeriesSchema decode_schema(std::span<const std::uint8_t> header) {
  detail::ByteReader in(header);
  in.skip(kHeaderPrefix);
  SeriesSchema s;
  s.name = in.str16();
  const auto precision = in.u8();
  const auto ts_codec = in.u8();
  const auto val_codec = in.u8();
  if (precision > 2 || ts_codec > 2 || val_codec > 2) fail(Errc::corruption, "unknown tag in header");
  s.precision = static_cast<TimestampPrecision>(precision);
  s.ts_codec = static_cast<TsCodec>(ts_codec);
  s.val_codec = static_cast<ValCodec>(val_codec);
  s.ingest.q = in.le<std::uint32_t>();
  s.ingest.a = in.f64();
  s.ingest.b_size = in.le<std::uint32_t>();
  const auto ncols = in.le<std::uint16_t>();
  for (std::uint16_t i = 0; i < ncols; ++i) {
    ColumnSpec c;
    c.name = in.str16();
    const auto type = in.u8();
    if (type > 3) fail(Errc::corruption, "unknown column type in header");
    c.type = static_cast<ColumnType>(type);
    s.columns.push_back(std::move(c));
  }
  if (in.remaining() != 4) fail(Errc::corruption, "header length mismatch");
  try {
    s.validate();
  } catch (const Error& e) {
    fail(Errc::corruption, std::string("invalid schema in header: ") + e.what());
  }
  return s;
}

}  // namespace

std::vector<std::uint8_t> encode_header(const SeriesSchema& schema) {
  std::vector<std::uint8_t> out(kHeaderMagic, kHeaderMagic + 4);
  detail::put_le(out, TrTableFile::format_version);
  detail::put_le<std::uint32_t>(out, 0);  // patched
  detail::put_str16(out, schema.name);
  detail::put_u8(out, static_cast<std::uint8_t>(schema.precision));
  detail::put_u8(out, static_cast<std::uint8_t>(schema.ts_codec));
  detail::put_u8(out, static_cast<std::uint8_t>(schema.val_codec));
  detail::put_le(out, schema.ingest.q);
  detail::put_f64(out, schema.ingest.a);
  detail::put_le(out, schema.ingest.b_size);
  detail::put_le(out, static_cast<std::uint16_t>(schema.columns.size()));
  for (const auto& c : schema.columns) {
    detail::put_str16(out, c.name);
    detail::put_u8(out, static_cast<std::uint8_t>(c.type));
  }
  const auto total = static_cast<std::uint32_t>(out.size() + 4);
  for (int i = 0; i < 4; ++i) out[6 + i] = static_cast<std::uint8_t>(total >> (8 * i));
  detail::put_le(out, detail::crc32(out));
  return out;
}

TrTableFile::TrTableFile(std::filesystem::path path, int fd, SeriesSchema schema, bool sync)
    : path_(std::move(path)), fd_(fd), schema_(std::move(schema)), sync_(sync) {}

TrTableFile::~TrTableFile() {
  if (fd_ >= 0) ::close(fd_);
}

std::shared_ptr<TrTableFile> TrTableFile::create(const std::filesystem::path& path, const SeriesSchema& schema,
                                                 bool sync) {
  schema.validate();
  const int fd = ::open(path.c_str(), O_RDWR | O_CREAT | O_EXCL | O_CLOEXEC, 0644);
  if (fd < 0) {
    if (errno == EEXIST) fail(Errc::already_exists, "series file '" + path.string() + "' already exists");
    io_fail("cannot create", path);
  }
  std::shared_ptr<TrTableFile> f(new TrTableFile(path, fd, schema, sync));
  const auto header = encode_header(schema);
  pwrite_all(fd, header.data(), header.size(), 0, path);
  f->header_size_ = header.size();
  f->blocks_end_ = header.size();
  f->write_footer();
  return f;
}

std::shared_ptr<TrTableFile> TrTableFile::open(const std::filesystem::path& path, bool sync, RecoveryReport& report) {
  const int fd = ::open(path.c_str(), O_RDWR | O_CLOEXEC);
  if (fd < 0) io_fail("cannot open", path);
  struct stat st {};
  if (::fstat(fd, &st) != 0) {
    ::close(fd);
    io_fail("cannot stat", path);
  }
  const auto size = static_cast<std::uint64_t>(st.st_size);

  std::shared_ptr<TrTableFile> f;
  std::uint32_t header_len = 0;
  try {
    if (size < kHeaderPrefix) fail(Errc::corruption, "file too short for a header");
    const auto prefix = read_range(fd, 0, kHeaderPrefix, path);
    if (std::memcmp(prefix.data(), kHeaderMagic, 4) != 0) fail(Errc::corruption, "bad magic");
    if (detail::get_le<std::uint16_t>(prefix, 4) != format_version) fail(Errc::corruption, "unsupported version");
    header_len = detail::get_le<std::uint32_t>(prefix, 6);
    if (header_len < kHeaderPrefix + 4 || header_len > size) fail(Errc::corruption, "bad header length");
    const auto header = read_range(fd, 0, header_len, path);
    const auto body = std::span<const std::uint8_t>(header).first(header_len - 4);
    if (detail::crc32(body) != detail::get_le<std::uint32_t>(header, header_len - 4)) {
      fail(Errc::corruption, "header checksum mismatch");
    }
    f.reset(new TrTableFile(path, fd, decode_schema(header), sync));
  } catch (...) {
    if (!f) ::close(fd);
    throw;
  }
  f->header_size_ = header_len;
  report.series = f->schema_.name;

  // Footer via the locator when present.
  bool have_locator = false;
  std::uint64_t footer_offset = 0;
  if (size >= f->header_size_ + locator_size + 8) {
    const auto loc = read_range(fd, size - locator_size, locator_size, path);
    footer_offset = detail::get_le<std::uint64_t>(loc, 0);
    have_locator = std::memcmp(loc.data() + 8, kLocatorMagic, 4) == 0 && footer_offset >= f->header_size_ &&
                   footer_offset + 8 <= size - locator_size;
  }
  if (have_locator) {
    const auto footer = read_range(fd, footer_offset, size - locator_size - footer_offset, path);
    if (detail::crc32(std::span<const std::uint8_t>(footer).first(footer.size() - 4)) !=
        detail::get_le<std::uint32_t>(footer, footer.size() - 4)) {
      fail(Errc::corruption, "footer checksum mismatch in '" + path.string() + "'");
    }
    detail::ByteReader in(std::span<const std::uint8_t>(footer).first(footer.size() - 4));
    const auto count = in.le<std::uint32_t>();
    std::uint64_t expected_offset = f->header_size_;
    for (std::uint32_t i = 0; i < count; ++i) {
      auto e = detail::read_index_entry(f->schema_, in);
      if (e.offset != expected_offset) fail(Errc::corruption, "footer entries are not contiguous");
      if (!f->index_.empty() && e.start < f->index_.back().end) fail(Errc::corruption, "footer entries out of order");
      expected_offset += e.length;
      f->index_.push_back(std::move(e));
    }
    if (in.remaining() != 0 || expected_offset != footer_offset) fail(Errc::corruption, "footer does not match blocks");
    f->blocks_end_ = footer_offset;
    return f;
  }

  // No usable locator: keep the longest prefix of valid blocks.
  report.scanned = true;
  std::uint64_t pos = f->header_size_;
  while (pos + block_framing_bytes <= size) {
    const auto len_bytes = read_range(fd, pos, 4, path);
    const std::uint64_t total = detail::get_le<std::uint32_t>(len_bytes, 0) + std::uint64_t{block_framing_bytes};
    if (pos + total > size || total > f->schema_.ingest.b_size) break;
    const auto block = read_range(fd, pos, static_cast<std::size_t>(total), path);
    std::vector<Row> rows;
    try {
      rows = decode_block(f->schema_, block);
    } catch (const Error&) {
      break;
    }
    auto e = summarize(f->schema_, rows);
    if (!f->index_.empty() && e.start < f->index_.back().end) break;
    e.offset = pos;
    e.length = static_cast<std::uint32_t>(total);
    e.crc = detail::get_le<std::uint32_t>(block, block.size() - 4);
    f->index_.push_back(std::move(e));
    pos += total;
  }
  f->blocks_end_ = pos;
  report.blocks_recovered = static_cast<std::uint32_t>(f->index_.size());
  report.bytes_discarded = size - pos;
  report.detail = "footer locator missing; rebuilt index from " + std::to_string(f->index_.size()) + " block(s), discarded " +
                  std::to_string(size - pos) + " trailing byte(s)";
  if (::ftruncate(fd, static_cast<off_t>(pos)) != 0) io_fail("cannot truncate", path);
  f->write_footer();
  return f;
}

std::uint64_t TrTableFile::footer_size() const noexcept {
  return 4 + index_.size() * index_entry_size(schema_) + 4 + locator_size;
}

void TrTableFile::write_footer() {
  std::vector<std::uint8_t> out;
  out.reserve(footer_size());
  detail::put_le(out, static_cast<std::uint32_t>(index_.size()));
  for (const auto& e : index_) write_index_entry(schema_, e, out);
  detail::put_le(out, detail::crc32(out));
  detail::put_le(out, blocks_end_);
  out.insert(out.end(), kLocatorMagic, kLocatorMagic + 4);
  pwrite_all(fd_, out.data(), out.size(), blocks_end_, path_);
  if (::ftruncate(fd_, static_cast<off_t>(blocks_end_ + out.size())) != 0) io_fail("cannot truncate", path_);
  sync_if_needed();
}

void TrTableFile::sync_if_needed() const {
  if (sync_ && ::fdatasync(fd_) != 0) io_fail("fdatasync failed", path_);
}

BlockIndexEntry TrTableFile::append_block(std::span<const std::uint8_t> block, BlockIndexEntry entry) {
  require(block.size() >= block_framing_bytes, "block image too short");
  require(entry.rows > 0, "cannot append an empty block");
  require(index_.empty() || entry.start >= index_.back().end, "blocks must be appended in time order");
  entry.offset = blocks_end_;
  entry.length = static_cast<std::uint32_t>(block.size());
  entry.crc = detail::get_le<std::uint32_t>(block, block.size() - 4);
  // Drop the old footer first: a crash before the new locator lands leaves a
  // file without a locator, which open() repairs by scanning.
  if (::ftruncate(fd_, static_cast<off_t>(blocks_end_)) != 0) io_fail("cannot truncate", path_);
  pwrite_all(fd_, block.data(), block.size(), blocks_end_, path_);
  sync_if_needed();
  blocks_end_ += block.size();
  index_.push_back(entry);
  write_footer();
  return entry;
}

std::vector<std::uint8_t> TrTableFile::read_block(const BlockIndexEntry& entry) const {
  auto bytes = read_range(fd_, entry.offset, entry.length, path_);
  if (bytes.size() < block_framing_bytes || detail::get_le<std::uint32_t>(bytes, bytes.size() - 4) != entry.crc) {
    fail(Errc::corruption, "block at offset " + std::to_string(entry.offset) + " does not match the index");
  }
  return bytes;
}

std::vector<Row> TrTableFile::read_rows(const BlockIndexEntry& entry) const {
  auto rows = decode_block(schema_, read_block(entry));
  if (rows.size() != entry.rows || rows.front().timestamp != entry.start || rows.back().timestamp != entry.end) {
    fail(Errc::corruption, "block at offset " + std::to_string(entry.offset) + " does not match the index");
  }
  return rows;
}

}  // namespace trt
