#include <limits>

#include "trt/codecs.hpp"
#include "trt/error.hpp"
#include "codec_detail.hpp"

namespace trt {

namespace {

constexpr unsigned kInitialRunK = 2;
constexpr unsigned kInitialDeltaK = 10;

std::uint64_t delta_of(std::int64_t from, std::int64_t to) noexcept {
  return static_cast<std::uint64_t>(to) - static_cast<std::uint64_t>(from);
}

// Adds an unsigned delta to a timestamp, rejecting results that go backwards
// or wrap; a valid stream never produces either.
std::int64_t advance(std::int64_t ts, std::uint64_t delta) {
  const std::int64_t next = static_cast<std::int64_t>(static_cast<std::uint64_t>(ts) + delta);
  if (next < ts) fail(Errc::corruption, "decoded timestamp goes backwards");
  return next;
}

// Delta-of-delta classes: '0', '10'+7, '110'+24, '1110'+32, '1111'+64. Each
// bounded class holds [-(2^(b-1) - 1), 2^(b-1)] stored as value + 2^(b-1) - 1.
struct DodClass {
  unsigned prefix_bits;
  std::uint64_t prefix;
  unsigned payload_bits;
};
constexpr DodClass kDodClasses[] = {{2, 0b10, 7}, {3, 0b110, 24}, {4, 0b1110, 32}};

void write_dod(BitWriter& w, std::int64_t dd) {
  if (dd == 0) {
    w.write_bit(false);
    return;
  }
  for (const auto& c : kDodClasses) {
    const std::int64_t half = std::int64_t{1} << (c.payload_bits - 1);
    if (dd >= -(half - 1) && dd <= half) {
      w.write_bits(c.prefix, c.prefix_bits);
      w.write_bits(static_cast<std::uint64_t>(dd + half - 1), c.payload_bits);
      return;
    }
  }
  w.write_bits(0b1111, 4);
  w.write_bits(static_cast<std::uint64_t>(dd), 64);
}

std::int64_t read_dod(BitReader& r) {
  unsigned ones = 0;
  while (ones < 4 && r.read_bit()) ++ones;
  switch (ones) {
    case 0: return 0;
    case 4: return static_cast<std::int64_t>(r.read_bits(64));
    default: {
      const auto& c = kDodClasses[ones - 1];
      const std::int64_t half = std::int64_t{1} << (c.payload_bits - 1);
      return static_cast<std::int64_t>(r.read_bits(c.payload_bits)) - (half - 1);
    }
  }
}

class DodEncoder final : public TimestampEncoder {
 public:
  explicit DodEncoder(TimestampPrecision precision)
      : TimestampEncoder(StreamTag::ts_dod), width_(first_delta_width(precision)) {}

  void append(std::int64_t ts) override {
    check_order(ts);
    if (count_ == 0) {
      w_.write_bits(static_cast<std::uint64_t>(ts), 64);
    } else {
      const std::uint64_t delta = delta_of(last_, ts);
      if (count_ == 1) {
        const std::uint64_t sentinel = (std::uint64_t{1} << width_) - 1;
        if (delta >= sentinel) {
          w_.write_bits(sentinel, width_);
          w_.write_bits(delta, 64);
        } else {
          w_.write_bits(delta, width_);
        }
      } else {
        write_dod(w_, static_cast<std::int64_t>(delta - prev_delta_));
      }
      prev_delta_ = delta;
    }
    last_ = ts;
    ++count_;
  }

  std::uint64_t payload_bits() const override { return w_.bit_position(); }
  std::vector<std::uint8_t> payload() const override {
    auto bytes = w_.finish();
    return {bytes.begin(), bytes.end()};
  }
  std::uint64_t max_append_bits() const noexcept override { return 64 + width_; }

 private:
  BitWriter w_;
  unsigned width_;
  std::uint64_t prev_delta_ = 0;
};

// Shared run-length machinery for the two (run, delta) codecs. Runs are held
// open until a different delta arrives or the payload is closed.
template <typename PairWriter>
class RunLengthEncoder final : public TimestampEncoder {
 public:
  RunLengthEncoder(StreamTag tag, PairWriter writer) : TimestampEncoder(tag), pairs_(std::move(writer)) {}

  void append(std::int64_t ts) override {
    check_order(ts);
    if (count_ == 0) {
      w_.write_bits(static_cast<std::uint64_t>(ts), 64);
    } else {
      const std::uint64_t delta = delta_of(last_, ts);
      if (run_length_ > 0 && delta == run_delta_) {
        ++run_length_;
      } else {
        if (run_length_ > 0) pairs_.write(w_, run_length_, run_delta_);
        run_delta_ = delta;
        run_length_ = 1;
      }
    }
    last_ = ts;
    ++count_;
  }

  std::uint64_t payload_bits() const override {
    std::uint64_t bits = w_.bit_position();
    if (run_length_ > 0) bits += pairs_.cost(run_length_, run_delta_);
    return bits;
  }

  std::vector<std::uint8_t> payload() const override {
    if (run_length_ == 0) {
      auto bytes = w_.finish();
      return {bytes.begin(), bytes.end()};
    }
    BitWriter closed = w_;
    PairWriter pairs = pairs_;
    pairs.write(closed, run_length_, run_delta_);
    return std::move(closed).take();
  }

  std::uint64_t max_append_bits() const noexcept override { return pairs_.max_pair_bits(); }

 private:
  BitWriter w_;
  PairWriter pairs_;
  std::uint64_t run_length_ = 0;
  std::uint64_t run_delta_ = 0;
};

struct Leb128Pairs {
  void write(BitWriter& w, std::uint64_t run, std::uint64_t delta) const {
    leb128_write(w, run);
    leb128_write(w, delta);
  }
  std::uint64_t cost(std::uint64_t run, std::uint64_t delta) const noexcept {
    return 8ull * (leb128_size(run) + leb128_size(delta));
  }
  // A closed pair of two 10-byte values plus one extra byte on the open run.
  std::uint64_t max_pair_bits() const noexcept { return 8 * 21; }
};

struct RicePairs {
  AdaptiveRice run{kInitialRunK};
  AdaptiveRice delta{kInitialDeltaK};

  void write(BitWriter& w, std::uint64_t r, std::uint64_t d) {
    run.encode(w, r);
    delta.encode(w, d);
  }
  std::uint64_t cost(std::uint64_t r, std::uint64_t d) const noexcept { return run.cost(r) + delta.cost(d); }
  std::uint64_t max_pair_bits() const noexcept { return 3 * (AdaptiveRice::escape_quotient + 64); }
};

template <typename PairReader>
std::vector<std::int64_t> decode_runs(BitReader& r, std::uint32_t count, PairReader&& read_pair) {
  std::vector<std::int64_t> out;
  if (count == 0) return out;
  out.reserve(count);
  std::int64_t ts = static_cast<std::int64_t>(r.read_bits(64));
  out.push_back(ts);
  while (out.size() < count) {
    const auto [run, delta] = read_pair(r);
    if (run == 0) fail(Errc::corruption, "zero-length run in timestamp stream");
    if (run > count - out.size()) fail(Errc::corruption, "run overruns the element count");
    for (std::uint64_t i = 0; i < run; ++i) {
      ts = advance(ts, delta);
      out.push_back(ts);
    }
  }
  return out;
}

}  // namespace

void TimestampEncoder::check_order(std::int64_t timestamp) {
  if (count_ > 0 && timestamp < last_) fail(Errc::contract_violation, "timestamps must be non-decreasing");
  if (count_ == std::numeric_limits<std::uint32_t>::max()) fail(Errc::contract_violation, "stream element count overflow");
}

unsigned first_delta_width(TimestampPrecision precision) noexcept {
  switch (precision) {
    case TimestampPrecision::seconds: return 14;
    case TimestampPrecision::milliseconds: return 24;
    case TimestampPrecision::nanoseconds: return 44;
  }
  return 44;
}

std::unique_ptr<TimestampEncoder> make_timestamp_encoder(TsCodec codec, TimestampPrecision precision) {
  switch (codec) {
    case TsCodec::dod: return std::make_unique<DodEncoder>(precision);
    case TsCodec::delta_rle_leb128:
      return std::make_unique<RunLengthEncoder<Leb128Pairs>>(StreamTag::ts_leb128, Leb128Pairs{});
    case TsCodec::delta_rle_rice:
      return std::make_unique<RunLengthEncoder<RicePairs>>(StreamTag::ts_rice, RicePairs{});
  }
  fail(Errc::contract_violation, "unknown timestamp codec");
}

std::vector<std::int64_t> decode_ts_payload(StreamTag tag, BitReader& r, std::uint32_t count,
                                            TimestampPrecision precision) {
  switch (tag) {
    case StreamTag::ts_dod: {
      std::vector<std::int64_t> out;
      if (count == 0) return out;
      out.reserve(count);
      std::int64_t ts = static_cast<std::int64_t>(r.read_bits(64));
      out.push_back(ts);
      if (count == 1) return out;
      const unsigned width = first_delta_width(precision);
      std::uint64_t delta = r.read_bits(width);
      if (delta == (std::uint64_t{1} << width) - 1) delta = r.read_bits(64);
      ts = advance(ts, delta);
      out.push_back(ts);
      while (out.size() < count) {
        delta += static_cast<std::uint64_t>(read_dod(r));
        ts = advance(ts, delta);
        out.push_back(ts);
      }
      return out;
    }
    case StreamTag::ts_leb128:
      return decode_runs(r, count, [](BitReader& in) {
        const auto run = leb128_read(in);
        return std::pair{run, leb128_read(in)};
      });
    case StreamTag::ts_rice: {
      RicePairs coders;
      return decode_runs(r, count, [&coders](BitReader& in) {
        const auto run = coders.run.decode(in);
        return std::pair{run, coders.delta.decode(in)};
      });
    }
    default: fail(Errc::corruption, "not a timestamp stream");
  }
}

EncodedStream encode_ts(TsCodec codec, std::span<const std::int64_t> timestamps, TimestampPrecision precision) {
  auto enc = make_timestamp_encoder(codec, precision);
  for (auto ts : timestamps) enc->append(ts);
  return enc->finish();
}

EncodedStream encode_ts_dod(std::span<const std::int64_t> timestamps, TimestampPrecision precision) {
  return encode_ts(TsCodec::dod, timestamps, precision);
}

EncodedStream encode_ts_delta_rle_leb128(std::span<const std::int64_t> timestamps, TimestampPrecision precision) {
  return encode_ts(TsCodec::delta_rle_leb128, timestamps, precision);
}

EncodedStream encode_ts_delta_rle_rice(std::span<const std::int64_t> timestamps, TimestampPrecision precision) {
  return encode_ts(TsCodec::delta_rle_rice, timestamps, precision);
}

namespace detail {
// Verifies that a standalone payload was consumed exactly: only zero padding
// may follow the last decoded bit.
void expect_exhausted(BitReader& r) {
  if (r.remaining() >= 8) fail(Errc::corruption, "trailing bytes after stream payload");
  if (r.remaining() > 0 && r.read_bits(static_cast<unsigned>(r.remaining())) != 0) {
    fail(Errc::corruption, "non-zero padding after stream payload");
  }
}
}  // namespace detail

std::vector<std::int64_t> decode_ts(const EncodedStream& stream, TimestampPrecision precision) {
  BitReader r(stream.payload);
  auto out = decode_ts_payload(stream.tag, r, stream.count, precision);
  detail::expect_exhausted(r);
  return out;
}

}  // namespace trt
