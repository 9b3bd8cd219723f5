#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace trt {

// Append-only bit writer. Bits are packed most-significant-bit first within
// each byte; the unused tail of the last byte is always zero.
class BitWriter {
 public:
  BitWriter() = default;

  // Appends the n low-order bits of value, MSB first. n must be <= 64 and
  // value must fit in n bits.
  void write_bits(std::uint64_t value, unsigned n);
  void write_bit(bool bit);
  // Appends `count` one-bits (unary runs).
  void write_ones(std::size_t count);
  // Appends whole bytes. Faster than write_bits when the writer is byte aligned.
  void write_bytes(std::span<const std::uint8_t> bytes);

  // Drops everything written after bit offset `bits`.
  void truncate(std::uint64_t bits);

  [[nodiscard]] std::uint64_t bit_position() const noexcept { return bit_position_; }
  [[nodiscard]] std::size_t byte_size() const noexcept { return buffer_.size(); }

  // Pads to a byte boundary with zero bits and returns the buffer. Calling it
  // again returns the same bytes.
  [[nodiscard]] std::span<const std::uint8_t> finish() const noexcept { return buffer_; }
  [[nodiscard]] std::vector<std::uint8_t> take() && { return std::move(buffer_); }

 private:
  std::vector<std::uint8_t> buffer_;
  std::uint64_t bit_position_ = 0;
};

// Sequential reader over a byte buffer produced by BitWriter. Reading past the
// end throws Errc::end_of_stream.
class BitReader {
 public:
  explicit BitReader(std::span<const std::uint8_t> buffer) noexcept
      : buffer_(buffer), total_bits_(static_cast<std::uint64_t>(buffer.size()) * 8) {}

  std::uint64_t read_bits(unsigned n);
  bool read_bit();
  // Counts consecutive one-bits, consuming the terminating zero. Stops after
  // `limit` ones without consuming a zero; returns limit in that case.
  std::size_t read_unary(std::size_t limit);

  void seek(std::uint64_t bit_offset);
  // Moves the cursor to the next byte boundary.
  void align();

  [[nodiscard]] std::uint64_t position() const noexcept { return cursor_; }
  [[nodiscard]] std::uint64_t total_bits() const noexcept { return total_bits_; }
  [[nodiscard]] std::uint64_t remaining() const noexcept { return total_bits_ - cursor_; }

 private:
  std::span<const std::uint8_t> buffer_;
  std::uint64_t total_bits_;
  std::uint64_t cursor_ = 0;
};

}  // namespace trt
