#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "trt/block.hpp"
#include "trt/schema.hpp"

namespace trt {

// What open() had to do to make a file usable.
struct RecoveryReport {
  std::string series;
  // The footer locator was missing or invalid, so blocks were re-validated by
  // a sequential scan and a new footer written.
  bool scanned = false;
  std::uint32_t blocks_recovered = 0;
  std::uint64_t bytes_discarded = 0;
  std::string detail;
};

// One series on disk: header, blocks, footer index, footer locator.
//
//   header   "TRTN" u16 version u32 header_len schema... u32 crc32
//   block    u32 body_len  body(streams)  u32 crc32(body)
//   footer   u32 entry_count  entries...  u32 crc32
//   locator  u64 footer_offset "TRTF"
//
// Each flush writes the new block where the previous footer began and then a
// fresh footer and locator, so the file is always header + blocks + footer.
// Appends are serialized by the caller; read_block may run concurrently with
// them because it only touches bytes of already indexed blocks.
class TrTableFile {
 public:
  static constexpr std::uint16_t format_version = 1;
  static constexpr std::size_t locator_size = 12;

  ~TrTableFile();
  TrTableFile(const TrTableFile&) = delete;
  TrTableFile& operator=(const TrTableFile&) = delete;

  // Fails with already_exists if the path exists.
  static std::shared_ptr<TrTableFile> create(const std::filesystem::path& path, const SeriesSchema& schema,
                                             bool sync);
  // Corrupt headers or footers with an intact locator are corruption errors.
  static std::shared_ptr<TrTableFile> open(const std::filesystem::path& path, bool sync, RecoveryReport& report);

  [[nodiscard]] const SeriesSchema& schema() const noexcept { return schema_; }
  // Entries in file order. Only stable while no append is running.
  [[nodiscard]] const std::vector<BlockIndexEntry>& index() const noexcept { return index_; }

  // Writes a block image produced by Memtable::build. `entry` supplies the
  // time range and aggregates; offset, length and crc are filled in.
  BlockIndexEntry append_block(std::span<const std::uint8_t> block, BlockIndexEntry entry);

  [[nodiscard]] std::vector<std::uint8_t> read_block(const BlockIndexEntry& entry) const;
  [[nodiscard]] std::vector<Row> read_rows(const BlockIndexEntry& entry) const;

  [[nodiscard]] std::uint64_t header_size() const noexcept { return header_size_; }
  [[nodiscard]] std::uint64_t footer_size() const noexcept;
  [[nodiscard]] std::uint64_t file_size() const noexcept { return blocks_end_ + footer_size(); }
  [[nodiscard]] const std::filesystem::path& path() const noexcept { return path_; }

 private:
  TrTableFile(std::filesystem::path path, int fd, SeriesSchema schema, bool sync);

  void write_footer();
  void sync_if_needed() const;

  std::filesystem::path path_;
  int fd_;
  SeriesSchema schema_;
  bool sync_;
  std::uint64_t header_size_ = 0;
  std::uint64_t blocks_end_ = 0;
  std::vector<BlockIndexEntry> index_;
};

[[nodiscard]] std::vector<std::uint8_t> encode_header(const SeriesSchema& schema);

}  // namespace trt
