#include <algorithm>
#include <bit>
#include <cmath>

#include "trt/codecs.hpp"
#include "trt/error.hpp"

namespace trt {

const char* to_string(TsCodec c) noexcept {
  switch (c) {
    case TsCodec::dod: return "dod";
    case TsCodec::delta_rle_leb128: return "leb";
    case TsCodec::delta_rle_rice: return "rice";
  }
  return "?";
}

const char* to_string(ValCodec c) noexcept {
  switch (c) {
    case ValCodec::gorilla: return "gorilla";
    case ValCodec::fpc: return "fpc";
    case ValCodec::exp_mantissa_dod: return "emdod";
  }
  return "?";
}

TsCodec parse_ts_codec(std::string_view name) {
  if (name == "dod") return TsCodec::dod;
  if (name == "leb" || name == "leb128") return TsCodec::delta_rle_leb128;
  if (name == "rice") return TsCodec::delta_rle_rice;
  fail(Errc::contract_violation, "unknown timestamp codec '" + std::string(name) + "'");
}

ValCodec parse_val_codec(std::string_view name) {
  if (name == "gorilla") return ValCodec::gorilla;
  if (name == "fpc") return ValCodec::fpc;
  if (name == "emdod") return ValCodec::exp_mantissa_dod;
  fail(Errc::contract_violation, "unknown value codec '" + std::string(name) + "'");
}

StreamTag stream_tag(TsCodec c) noexcept {
  switch (c) {
    case TsCodec::dod: return StreamTag::ts_dod;
    case TsCodec::delta_rle_leb128: return StreamTag::ts_leb128;
    case TsCodec::delta_rle_rice: return StreamTag::ts_rice;
  }
  return StreamTag::ts_dod;
}

StreamTag stream_tag(ValCodec c) noexcept {
  switch (c) {
    case ValCodec::gorilla: return StreamTag::val_gorilla;
    case ValCodec::fpc: return StreamTag::val_fpc;
    case ValCodec::exp_mantissa_dod: return StreamTag::val_exp_mantissa;
  }
  return StreamTag::val_gorilla;
}

void EncodedStream::append_to(std::vector<std::uint8_t>& out) const {
  out.push_back(static_cast<std::uint8_t>(tag));
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(count >> (8 * i)));
  out.insert(out.end(), payload.begin(), payload.end());
}

std::vector<std::uint8_t> EncodedStream::serialize() const {
  std::vector<std::uint8_t> out;
  out.reserve(serialized_size());
  append_to(out);
  return out;
}

EncodedStream EncodedStream::parse(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < header_size) fail(Errc::end_of_stream, "stream shorter than its header");
  EncodedStream s;
  s.tag = static_cast<StreamTag>(bytes[0]);
  for (int i = 0; i < 4; ++i) s.count |= static_cast<std::uint32_t>(bytes[1 + i]) << (8 * i);
  s.payload.assign(bytes.begin() + header_size, bytes.end());
  return s;
}

std::uint64_t to_word(double v) noexcept { return std::bit_cast<std::uint64_t>(v); }
double from_word(std::uint64_t w) noexcept { return std::bit_cast<double>(w); }

std::vector<std::uint64_t> to_words(std::span<const double> values) {
  std::vector<std::uint64_t> out(values.size());
  std::transform(values.begin(), values.end(), out.begin(), to_word);
  return out;
}

std::vector<double> from_words(std::span<const std::uint64_t> words) {
  std::vector<double> out(words.size());
  std::transform(words.begin(), words.end(), out.begin(), from_word);
  return out;
}

void leb128_write(BitWriter& w, std::uint64_t value) {
  do {
    auto byte = static_cast<std::uint8_t>(value & 0x7F);
    value >>= 7;
    if (value != 0) byte |= 0x80;
    w.write_bits(byte, 8);
  } while (value != 0);
}

std::uint64_t leb128_read(BitReader& r) {
  std::uint64_t value = 0;
  for (unsigned shift = 0; shift < 64; shift += 7) {
    const auto byte = r.read_bits(8);
    const std::uint64_t group = byte & 0x7F;
    if (shift == 63 && group > 1) fail(Errc::corruption, "LEB128 value overflows 64 bits");
    value |= group << shift;
    if ((byte & 0x80) == 0) return value;
  }
  fail(Errc::corruption, "LEB128 value longer than 10 bytes");
}

unsigned leb128_size(std::uint64_t value) noexcept {
  unsigned n = 1;
  while (value >>= 7) ++n;
  return n;
}

void AdaptiveRice::encode(BitWriter& w, std::uint64_t value) {
  const std::uint64_t quotient = value >> k_;
  if (quotient >= escape_quotient) {
    w.write_ones(escape_quotient);
    w.write_bits(value, 64);
    k_ = std::min(max_k, k_ + 8);
    return;
  }
  w.write_ones(static_cast<std::size_t>(quotient));
  w.write_bit(false);
  w.write_bits(value & ((std::uint64_t{1} << k_) - 1), k_);
  adapt(quotient);
}

std::uint64_t AdaptiveRice::decode(BitReader& r) {
  const std::size_t ones = r.read_unary(escape_quotient);
  if (ones == escape_quotient) {
    const auto value = r.read_bits(64);
    k_ = std::min(max_k, k_ + 8);
    return value;
  }
  const std::uint64_t quotient = ones;
  const std::uint64_t remainder = r.read_bits(k_);
  if (k_ > 0 && quotient > (~std::uint64_t{0} >> k_)) fail(Errc::corruption, "Rice quotient overflows 64 bits");
  const std::uint64_t value = (quotient << k_) | remainder;
  adapt(quotient);
  return value;
}

std::uint64_t AdaptiveRice::cost(std::uint64_t value) const noexcept {
  const std::uint64_t quotient = value >> k_;
  if (quotient >= escape_quotient) return escape_quotient + 64;
  return quotient + 1 + k_;
}

void AdaptiveRice::adapt(std::uint64_t quotient) noexcept {
  if (quotient == 0) {
    if (k_ > 0) --k_;
  } else if (quotient > 1) {
    k_ = static_cast<unsigned>(std::min<std::uint64_t>(max_k, k_ + quotient));
  }
}

double median(std::vector<double> values) {
  require(!values.empty(), "median of an empty list");
  const std::size_t n = values.size();
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(values.begin(), mid, values.end());
  const double upper = *mid;
  if (n % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), mid);
  return lower + (upper - lower) / 2.0;
}

double mad(std::span<const double> values) {
  require(!values.empty(), "MAD of an empty list");
  const double m = median(std::vector<double>(values.begin(), values.end()));
  std::vector<double> deviations(values.size());
  std::transform(values.begin(), values.end(), deviations.begin(), [m](double v) { return std::fabs(v - m); });
  return median(std::move(deviations));
}

}  // namespace trt
