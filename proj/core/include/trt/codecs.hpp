#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "trt/bitstream.hpp"
#include "trt/types.hpp"

namespace trt {

// Timestamp codecs. Numeric values are the tags written in TrTable headers.
enum class TsCodec : std::uint8_t { dod = 0, delta_rle_leb128 = 1, delta_rle_rice = 2 };
// Value codecs.
enum class ValCodec : std::uint8_t { gorilla = 0, fpc = 1, exp_mantissa_dod = 2 };

[[nodiscard]] const char* to_string(TsCodec c) noexcept;
[[nodiscard]] const char* to_string(ValCodec c) noexcept;
// Short CLI names: dod|leb|rice and gorilla|fpc|emdod.
[[nodiscard]] TsCodec parse_ts_codec(std::string_view name);
[[nodiscard]] ValCodec parse_val_codec(std::string_view name);

// First byte of every serialized stream.
enum class StreamTag : std::uint8_t {
  ts_dod = 0x01,
  ts_leb128 = 0x02,
  ts_rice = 0x03,
  val_gorilla = 0x11,
  val_fpc = 0x12,
  val_exp_mantissa = 0x13,
  raw_strings = 0x20,
};

[[nodiscard]] StreamTag stream_tag(TsCodec c) noexcept;
[[nodiscard]] StreamTag stream_tag(ValCodec c) noexcept;

// Serialized layout: tag byte, element count (u32 little-endian), payload.
// The payload length is implied by decoding `count` elements; its final byte is
// zero-padded.
struct EncodedStream {
  StreamTag tag{};
  std::uint32_t count = 0;
  std::vector<std::uint8_t> payload;

  static constexpr std::size_t header_size = 5;

  [[nodiscard]] std::size_t serialized_size() const noexcept { return header_size + payload.size(); }
  void append_to(std::vector<std::uint8_t>& out) const;
  [[nodiscard]] std::vector<std::uint8_t> serialize() const;
  // Parses a standalone stream whose payload runs to the end of `bytes`.
  [[nodiscard]] static EncodedStream parse(std::span<const std::uint8_t> bytes);

  friend bool operator==(const EncodedStream&, const EncodedStream&) = default;
};

// ---------------------------------------------------------------------------
// Incremental encoders. The memtable keeps one per column while a block is
// open; the batch functions further down are thin wrappers.

class TimestampEncoder {
 public:
  virtual ~TimestampEncoder() = default;

  // Timestamps must be non-decreasing; equal values are fine.
  virtual void append(std::int64_t timestamp) = 0;
  // Payload size in bits if the stream were closed now.
  [[nodiscard]] virtual std::uint64_t payload_bits() const = 0;
  // Closed payload. Does not modify the encoder, so appends may continue.
  [[nodiscard]] virtual std::vector<std::uint8_t> payload() const = 0;
  // Upper bound on how much payload_bits() can grow from one append.
  [[nodiscard]] virtual std::uint64_t max_append_bits() const noexcept = 0;

  [[nodiscard]] std::uint32_t count() const noexcept { return count_; }
  [[nodiscard]] StreamTag tag() const noexcept { return tag_; }
  [[nodiscard]] EncodedStream finish() const { return {tag_, count_, payload()}; }

 protected:
  explicit TimestampEncoder(StreamTag tag) : tag_(tag) {}
  void check_order(std::int64_t timestamp);

  std::uint32_t count_ = 0;
  std::int64_t last_ = 0;

 private:
  StreamTag tag_;
};

class ValueEncoder {
 public:
  virtual ~ValueEncoder() = default;

  virtual void append(std::uint64_t word) = 0;
  [[nodiscard]] virtual std::uint64_t payload_bits() const = 0;
  [[nodiscard]] virtual std::vector<std::uint8_t> payload() const = 0;
  [[nodiscard]] virtual std::uint64_t max_append_bits() const noexcept = 0;

  [[nodiscard]] std::uint32_t count() const noexcept { return count_; }
  [[nodiscard]] StreamTag tag() const noexcept { return tag_; }
  [[nodiscard]] EncodedStream finish() const { return {tag_, count_, payload()}; }

 protected:
  explicit ValueEncoder(StreamTag tag) : tag_(tag) {}

  std::uint32_t count_ = 0;

 private:
  StreamTag tag_;
};

[[nodiscard]] std::unique_ptr<TimestampEncoder> make_timestamp_encoder(TsCodec codec,
                                                                       TimestampPrecision precision);
[[nodiscard]] std::unique_ptr<ValueEncoder> make_value_encoder(ValCodec codec);

// Decodes `count` timestamps / words starting at the reader's cursor. The
// cursor is left just past the last payload bit.
[[nodiscard]] std::vector<std::int64_t> decode_ts_payload(StreamTag tag, BitReader& reader, std::uint32_t count,
                                                          TimestampPrecision precision);
[[nodiscard]] std::vector<std::uint64_t> decode_val_payload(StreamTag tag, BitReader& reader,
                                                            std::uint32_t count);

// ---------------------------------------------------------------------------
// Batch API.

[[nodiscard]] EncodedStream encode_ts(TsCodec codec, std::span<const std::int64_t> timestamps,
                                      TimestampPrecision precision);
[[nodiscard]] EncodedStream encode_ts_dod(std::span<const std::int64_t> timestamps, TimestampPrecision precision);
[[nodiscard]] EncodedStream encode_ts_delta_rle_leb128(std::span<const std::int64_t> timestamps,
                                                       TimestampPrecision precision);
[[nodiscard]] EncodedStream encode_ts_delta_rle_rice(std::span<const std::int64_t> timestamps,
                                                     TimestampPrecision precision);
// Throws corruption if the stream is not a timestamp stream or has trailing
// garbage, end_of_stream if it is truncated.
[[nodiscard]] std::vector<std::int64_t> decode_ts(const EncodedStream& stream, TimestampPrecision precision);

[[nodiscard]] EncodedStream encode_val(ValCodec codec, std::span<const std::uint64_t> words);
[[nodiscard]] EncodedStream encode_val_gorilla(std::span<const std::uint64_t> words);
[[nodiscard]] EncodedStream encode_val_fpc(std::span<const std::uint64_t> words);
[[nodiscard]] EncodedStream encode_val_expmantissa_dod(std::span<const std::uint64_t> words);
// The stream tag must match `codec`; a mismatch is reported as corruption.
[[nodiscard]] std::vector<std::uint64_t> decode_val(const EncodedStream& stream, ValCodec codec);

[[nodiscard]] std::uint64_t to_word(double v) noexcept;
[[nodiscard]] double from_word(std::uint64_t w) noexcept;
[[nodiscard]] std::vector<std::uint64_t> to_words(std::span<const double> values);
[[nodiscard]] std::vector<double> from_words(std::span<const std::uint64_t> words);

// ---------------------------------------------------------------------------
// Building blocks, exposed for tests and tooling.

// Bits of the first delta in a delta-of-delta header: 14/24/44 for s/ms/ns.
[[nodiscard]] unsigned first_delta_width(TimestampPrecision precision) noexcept;

void leb128_write(BitWriter& w, std::uint64_t value);
[[nodiscard]] std::uint64_t leb128_read(BitReader& r);
[[nodiscard]] unsigned leb128_size(std::uint64_t value) noexcept;

// Rice coder with backward adaptation of k: q == 0 lowers k by one, q == 1
// keeps it, q > 1 raises it by q. k stays within [0, 63]. A quotient of
// `escape_quotient` or more is written as that many ones followed by the raw
// 64-bit value, after which k rises by 8.
class AdaptiveRice {
 public:
  static constexpr unsigned escape_quotient = 48;
  static constexpr unsigned max_k = 63;

  explicit AdaptiveRice(unsigned k) noexcept : k_(k > max_k ? max_k : k) {}

  void encode(BitWriter& w, std::uint64_t value);
  [[nodiscard]] std::uint64_t decode(BitReader& r);
  // Bits encode(value) would emit with the current k.
  [[nodiscard]] std::uint64_t cost(std::uint64_t value) const noexcept;
  [[nodiscard]] unsigned k() const noexcept { return k_; }

 private:
  void adapt(std::uint64_t quotient) noexcept;

  unsigned k_;
};

// Median absolute deviation. Even-length medians average the two middle
// elements. Throws contract_violation on empty input.
[[nodiscard]] double median(std::vector<double> values);
[[nodiscard]] double mad(std::span<const double> values);

}  // namespace trt
