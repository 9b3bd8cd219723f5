#include "trt/bitstream.hpp"

#include <algorithm>

#include "trt/error.hpp"

namespace trt {

void BitWriter::write_bits(std::uint64_t value, unsigned n) {
  if (n > 64) fail(Errc::contract_violation, "write_bits: bit count exceeds 64");
  if (n < 64 && (value >> n) != 0) fail(Errc::contract_violation, "write_bits: value does not fit in bit count");
  while (n > 0) {
    const unsigned used = static_cast<unsigned>(bit_position_ & 7);
    if (used == 0) buffer_.push_back(0);
    const unsigned room = 8 - used;
    const unsigned take = std::min(room, n);
    const auto chunk = static_cast<std::uint8_t>((value >> (n - take)) & ((1u << take) - 1));
    buffer_.back() = static_cast<std::uint8_t>(buffer_.back() | (chunk << (room - take)));
    n -= take;
    bit_position_ += take;
  }
}

void BitWriter::write_bit(bool bit) { write_bits(bit ? 1 : 0, 1); }

void BitWriter::write_ones(std::size_t count) {
  while (count >= 64) {
    write_bits(~std::uint64_t{0}, 64);
    count -= 64;
  }
  if (count > 0) write_bits((std::uint64_t{1} << count) - 1, static_cast<unsigned>(count));
}

void BitWriter::write_bytes(std::span<const std::uint8_t> bytes) {
  if ((bit_position_ & 7) == 0) {
    buffer_.insert(buffer_.end(), bytes.begin(), bytes.end());
    bit_position_ += static_cast<std::uint64_t>(bytes.size()) * 8;
    return;
  }
  for (auto b : bytes) write_bits(b, 8);
}

void BitWriter::truncate(std::uint64_t bits) {
  if (bits > bit_position_) fail(Errc::contract_violation, "truncate: offset beyond written bits");
  bit_position_ = bits;
  buffer_.resize(static_cast<std::size_t>((bits + 7) / 8));
  if (const unsigned used = static_cast<unsigned>(bits & 7); used != 0) {
    buffer_.back() = static_cast<std::uint8_t>(buffer_.back() & (0xFFu << (8 - used)));
  }
}

std::uint64_t BitReader::read_bits(unsigned n) {
  if (n > 64) fail(Errc::contract_violation, "read_bits: bit count exceeds 64");
  if (n > remaining()) fail(Errc::end_of_stream, "read past end of bit stream");
  std::uint64_t out = 0;
  while (n > 0) {
    const auto byte = buffer_[static_cast<std::size_t>(cursor_ >> 3)];
    const unsigned used = static_cast<unsigned>(cursor_ & 7);
    const unsigned room = 8 - used;
    const unsigned take = std::min(room, n);
    const unsigned bits = (static_cast<unsigned>(byte) >> (room - take)) & ((1u << take) - 1);
    out = (out << take) | bits;
    n -= take;
    cursor_ += take;
  }
  return out;
}

bool BitReader::read_bit() { return read_bits(1) != 0; }

std::size_t BitReader::read_unary(std::size_t limit) {
  std::size_t ones = 0;
  while (ones < limit) {
    if (!read_bit()) return ones;
    ++ones;
  }
  return ones;
}

void BitReader::seek(std::uint64_t bit_offset) {
  if (bit_offset > total_bits_) fail(Errc::end_of_stream, "seek past end of bit stream");
  cursor_ = bit_offset;
}

void BitReader::align() { cursor_ = std::min(total_bits_, (cursor_ + 7) & ~std::uint64_t{7}); }

}  // namespace trt
