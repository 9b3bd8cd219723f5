#include <bit>
#include <limits>

#include "codec_detail.hpp"
#include "trt/codecs.hpp"
#include "trt/error.hpp"

namespace trt {

namespace {

template <typename Writer>
std::vector<std::uint8_t> bytes_of(const Writer& w) {
  auto bytes = w.finish();
  return {bytes.begin(), bytes.end()};
}

// ---------------------------------------------------------------------------
// XOR against the previous value. The '10' branch reuses the window (leading
// zeros, trailing zeros) of the most recent '11' block.

constexpr unsigned kNoWindow = 65;

class GorillaEncoder final : public ValueEncoder {
 public:
  GorillaEncoder() : ValueEncoder(StreamTag::val_gorilla) {}

  void append(std::uint64_t word) override {
    if (count_ == std::numeric_limits<std::uint32_t>::max()) fail(Errc::contract_violation, "stream element count overflow");
    if (count_ == 0) {
      w_.write_bits(word, 64);
    } else {
      const std::uint64_t x = word ^ prev_;
      if (x == 0) {
        w_.write_bit(false);
      } else {
        const auto lead = static_cast<unsigned>(std::countl_zero(x));
        const auto trail = static_cast<unsigned>(std::countr_zero(x));
        if (lead_ != kNoWindow && lead >= lead_ && trail == trail_) {
          w_.write_bits(0b10, 2);
          w_.write_bits(x >> trail_, 64 - lead_ - trail_);
        } else {
          const unsigned meaningful = 64 - lead - trail;
          w_.write_bits(0b11, 2);
          w_.write_bits(lead, 6);
          w_.write_bits(meaningful & 63, 6);  // 64 is stored as 0
          w_.write_bits(x >> trail, meaningful);
          lead_ = lead;
          trail_ = trail;
        }
      }
    }
    prev_ = word;
    ++count_;
  }

  std::uint64_t payload_bits() const override { return w_.bit_position(); }
  std::vector<std::uint8_t> payload() const override { return bytes_of(w_); }
  std::uint64_t max_append_bits() const noexcept override { return 2 + 6 + 6 + 64; }

 private:
  BitWriter w_;
  std::uint64_t prev_ = 0;
  unsigned lead_ = kNoWindow;
  unsigned trail_ = 0;
};

std::vector<std::uint64_t> decode_gorilla(BitReader& r, std::uint32_t count) {
  std::vector<std::uint64_t> out;
  if (count == 0) return out;
  out.reserve(count);
  std::uint64_t prev = r.read_bits(64);
  out.push_back(prev);
  unsigned lead = kNoWindow;
  unsigned trail = 0;
  while (out.size() < count) {
    if (r.read_bit()) {
      std::uint64_t x;
      if (!r.read_bit()) {
        if (lead == kNoWindow) fail(Errc::corruption, "gorilla window reused before being set");
        x = r.read_bits(64 - lead - trail) << trail;
        if (x == 0 || static_cast<unsigned>(std::countr_zero(x)) != trail) {
          fail(Errc::corruption, "gorilla block does not match its window");
        }
      } else {
        const auto l = static_cast<unsigned>(r.read_bits(6));
        unsigned m = static_cast<unsigned>(r.read_bits(6));
        if (m == 0) m = 64;
        if (l + m > 64) fail(Errc::corruption, "gorilla window exceeds 64 bits");
        const std::uint64_t bits = r.read_bits(m);
        if ((bits & 1) == 0 || (bits >> (m - 1)) != 1) fail(Errc::corruption, "gorilla window not tight");
        lead = l;
        trail = 64 - l - m;
        x = bits << trail;
      }
      prev ^= x;
    }
    out.push_back(prev);
  }
  return out;
}

// ---------------------------------------------------------------------------
// FPC: the better of an fcm and a dfcm hash predictor; the residual XOR is
// written as selector bit, 3-bit leading-zero-byte code and the low bytes.

constexpr unsigned kFpcTableBits = 16;
constexpr std::uint64_t kFpcMask = (std::uint64_t{1} << kFpcTableBits) - 1;
// Leading zero bytes represented by each 3-bit code. Counts 5 and 7 round
// down to 4 and 6; code 7 is unused.
constexpr unsigned kFpcCodeToZeroBytes[] = {0, 1, 2, 3, 4, 6, 8};
constexpr unsigned kFpcZeroBytesToCode[] = {0, 1, 2, 3, 4, 4, 5, 5, 6};

unsigned leading_zero_bytes(std::uint64_t x) noexcept { return static_cast<unsigned>(std::countl_zero(x)) / 8; }

struct FpcPredictor {
  std::vector<std::uint64_t> fcm = std::vector<std::uint64_t>(std::size_t{1} << kFpcTableBits, 0);
  std::vector<std::uint64_t> dfcm = std::vector<std::uint64_t>(std::size_t{1} << kFpcTableBits, 0);
  std::uint64_t fcm_hash = 0;
  std::uint64_t dfcm_hash = 0;
  std::uint64_t last = 0;

  [[nodiscard]] std::uint64_t fcm_prediction() const noexcept { return fcm[fcm_hash]; }
  [[nodiscard]] std::uint64_t dfcm_prediction() const noexcept { return dfcm[dfcm_hash] + last; }

  void update(std::uint64_t value) noexcept {
    fcm[fcm_hash] = value;
    fcm_hash = ((fcm_hash << 6) ^ (value >> 48)) & kFpcMask;
    const std::uint64_t stride = value - last;
    dfcm[dfcm_hash] = stride;
    dfcm_hash = ((dfcm_hash << 6) ^ (stride >> 48)) & kFpcMask;
    last = value;
  }
};

struct FpcChoice {
  bool use_dfcm;
  std::uint64_t residual;
};

FpcChoice choose(const FpcPredictor& p, std::uint64_t value) noexcept {
  const std::uint64_t x_fcm = value ^ p.fcm_prediction();
  const std::uint64_t x_dfcm = value ^ p.dfcm_prediction();
  if (leading_zero_bytes(x_dfcm) > leading_zero_bytes(x_fcm)) return {true, x_dfcm};
  return {false, x_fcm};
}

class FpcEncoder final : public ValueEncoder {
 public:
  FpcEncoder() : ValueEncoder(StreamTag::val_fpc) {}

  void append(std::uint64_t word) override {
    if (count_ == std::numeric_limits<std::uint32_t>::max()) fail(Errc::contract_violation, "stream element count overflow");
    const auto choice = choose(predictor_, word);
    const unsigned code = kFpcZeroBytesToCode[leading_zero_bytes(choice.residual)];
    const unsigned kept = 8 - kFpcCodeToZeroBytes[code];
    w_.write_bit(choice.use_dfcm);
    w_.write_bits(code, 3);
    w_.write_bits(kept == 8 ? choice.residual : choice.residual & ((std::uint64_t{1} << (8 * kept)) - 1), 8 * kept);
    predictor_.update(word);
    ++count_;
  }

  std::uint64_t payload_bits() const override { return w_.bit_position(); }
  std::vector<std::uint8_t> payload() const override { return bytes_of(w_); }
  std::uint64_t max_append_bits() const noexcept override { return 4 + 64; }

 private:
  BitWriter w_;
  FpcPredictor predictor_;
};

std::vector<std::uint64_t> decode_fpc(BitReader& r, std::uint32_t count) {
  std::vector<std::uint64_t> out;
  out.reserve(count);
  FpcPredictor predictor;
  while (out.size() < count) {
    const bool use_dfcm = r.read_bit();
    const auto code = static_cast<unsigned>(r.read_bits(3));
    if (code >= std::size(kFpcCodeToZeroBytes)) fail(Errc::corruption, "invalid FPC zero-byte code");
    const unsigned kept = 8 - kFpcCodeToZeroBytes[code];
    const std::uint64_t residual = r.read_bits(8 * kept);
    const std::uint64_t value = residual ^ (use_dfcm ? predictor.dfcm_prediction() : predictor.fcm_prediction());
    // The encoder's choices are a function of the value; re-deriving them
    // catches most foreign or damaged payloads.
    const auto expected = choose(predictor, value);
    if (expected.use_dfcm != use_dfcm || kFpcZeroBytesToCode[leading_zero_bytes(residual)] != code) {
      fail(Errc::corruption, "FPC residual inconsistent with its predictor");
    }
    predictor.update(value);
    out.push_back(value);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sign bit, then delta-of-delta of the 11-bit exponent and of the 52-bit
// mantissa. Differences wrap within each field's width, so every delta of
// delta fits its widest class.

constexpr unsigned kExpBits = 11;
constexpr unsigned kManBits = 52;
constexpr std::uint64_t kExpMask = (std::uint64_t{1} << kExpBits) - 1;
constexpr std::uint64_t kManMask = (std::uint64_t{1} << kManBits) - 1;

// Field difference interpreted as a signed value of the given width.
std::int64_t wrap_signed(std::uint64_t diff, unsigned bits) noexcept {
  const std::uint64_t mask = (std::uint64_t{1} << bits) - 1;
  diff &= mask;
  if (diff >> (bits - 1)) return static_cast<std::int64_t>(diff) - static_cast<std::int64_t>(mask + 1);
  return static_cast<std::int64_t>(diff);
}

struct MantissaClass {
  unsigned prefix_bits;
  std::uint64_t prefix;
  unsigned payload_bits;
  std::int64_t lo;
  std::int64_t hi;
  std::int64_t offset;
};
constexpr MantissaClass kMantissaClasses[] = {
    {2, 0b10, 7, -(std::int64_t{1} << 6) + 1, std::int64_t{1} << 6, (std::int64_t{1} << 6) - 1},
    {3, 0b110, 32, -(std::int64_t{1} << 31) + 1, std::int64_t{1} << 31, (std::int64_t{1} << 31) - 1},
    {4, 0b1110, 48, -(std::int64_t{1} << 47) + 1, std::int64_t{1} << 47, (std::int64_t{1} << 47) - 1},
    {4, 0b1111, 54, std::numeric_limits<std::int64_t>::min(), std::numeric_limits<std::int64_t>::max(),
     (std::int64_t{1} << 53) - 1},
};

const MantissaClass& mantissa_class(std::int64_t dd) noexcept {
  for (const auto& c : kMantissaClasses) {
    if (dd >= c.lo && dd <= c.hi) return c;
  }
  return kMantissaClasses[3];
}

struct FieldState {
  std::uint64_t exponent = 0;
  std::uint64_t mantissa = 0;
  std::uint64_t exp_delta = 0;
  std::uint64_t man_delta = 0;
};

class ExpMantissaEncoder final : public ValueEncoder {
 public:
  ExpMantissaEncoder() : ValueEncoder(StreamTag::val_exp_mantissa) {}

  void append(std::uint64_t word) override {
    if (count_ == std::numeric_limits<std::uint32_t>::max()) fail(Errc::contract_violation, "stream element count overflow");
    const std::uint64_t exponent = (word >> kManBits) & kExpMask;
    const std::uint64_t mantissa = word & kManMask;
    if (count_ == 0) {
      w_.write_bits(word, 64);
    } else {
      w_.write_bit((word >> 63) != 0);
      const std::uint64_t exp_delta = (exponent - s_.exponent) & kExpMask;
      const std::int64_t exp_dd = wrap_signed(exp_delta - s_.exp_delta, kExpBits);
      if (exp_dd == 0) {
        w_.write_bit(false);
      } else {
        w_.write_bit(true);
        w_.write_bits(static_cast<std::uint64_t>(exp_dd + static_cast<std::int64_t>(kExpMask)), kExpBits + 1);
      }
      const std::uint64_t man_delta = (mantissa - s_.mantissa) & kManMask;
      const std::int64_t man_dd = wrap_signed(man_delta - s_.man_delta, kManBits);
      if (man_dd == 0) {
        w_.write_bit(false);
      } else {
        const auto& c = mantissa_class(man_dd);
        w_.write_bits(c.prefix, c.prefix_bits);
        w_.write_bits(static_cast<std::uint64_t>(man_dd + c.offset), c.payload_bits);
      }
      s_.exp_delta = exp_delta;
      s_.man_delta = man_delta;
    }
    s_.exponent = exponent;
    s_.mantissa = mantissa;
    ++count_;
  }

  std::uint64_t payload_bits() const override { return w_.bit_position(); }
  std::vector<std::uint8_t> payload() const override { return bytes_of(w_); }
  std::uint64_t max_append_bits() const noexcept override { return 64; }

 private:
  BitWriter w_;
  FieldState s_;
};

std::vector<std::uint64_t> decode_exp_mantissa(BitReader& r, std::uint32_t count) {
  std::vector<std::uint64_t> out;
  if (count == 0) return out;
  out.reserve(count);
  const std::uint64_t first = r.read_bits(64);
  out.push_back(first);
  FieldState s{(first >> kManBits) & kExpMask, first & kManMask, 0, 0};
  while (out.size() < count) {
    const std::uint64_t sign = r.read_bit() ? 1 : 0;
    std::int64_t exp_dd = 0;
    if (r.read_bit()) {
      exp_dd = static_cast<std::int64_t>(r.read_bits(kExpBits + 1)) - static_cast<std::int64_t>(kExpMask);
      if (exp_dd == 0 || exp_dd < -1024 || exp_dd > 1023) fail(Errc::corruption, "exponent delta-of-delta out of range");
    }
    std::int64_t man_dd = 0;
    unsigned ones = 0;
    while (ones < 4 && r.read_bit()) ++ones;
    if (ones > 0) {
      const auto& cls = kMantissaClasses[ones - 1];
      man_dd = static_cast<std::int64_t>(r.read_bits(cls.payload_bits)) - cls.offset;
      if (man_dd == 0 || &mantissa_class(man_dd) != &cls || man_dd < -(std::int64_t{1} << 51) ||
          man_dd >= (std::int64_t{1} << 51)) {
        fail(Errc::corruption, "mantissa delta-of-delta in the wrong class");
      }
    }
    s.exp_delta = (s.exp_delta + static_cast<std::uint64_t>(exp_dd)) & kExpMask;
    s.man_delta = (s.man_delta + static_cast<std::uint64_t>(man_dd)) & kManMask;
    s.exponent = (s.exponent + s.exp_delta) & kExpMask;
    s.mantissa = (s.mantissa + s.man_delta) & kManMask;
    out.push_back((sign << 63) | (s.exponent << kManBits) | s.mantissa);
  }
  return out;
}

}  // namespace

std::unique_ptr<ValueEncoder> make_value_encoder(ValCodec codec) {
  switch (codec) {
    case ValCodec::gorilla: return std::make_unique<GorillaEncoder>();
    case ValCodec::fpc: return std::make_unique<FpcEncoder>();
    case ValCodec::exp_mantissa_dod: return std::make_unique<ExpMantissaEncoder>();
  }
  fail(Errc::contract_violation, "unknown value codec");
}

std::vector<std::uint64_t> decode_val_payload(StreamTag tag, BitReader& r, std::uint32_t count) {
  switch (tag) {
    case StreamTag::val_gorilla: return decode_gorilla(r, count);
    case StreamTag::val_fpc: return decode_fpc(r, count);
    case StreamTag::val_exp_mantissa: return decode_exp_mantissa(r, count);
    default: fail(Errc::corruption, "not a value stream");
  }
}

EncodedStream encode_val(ValCodec codec, std::span<const std::uint64_t> words) {
  auto enc = make_value_encoder(codec);
  for (auto w : words) enc->append(w);
  return enc->finish();
}

EncodedStream encode_val_gorilla(std::span<const std::uint64_t> words) { return encode_val(ValCodec::gorilla, words); }
EncodedStream encode_val_fpc(std::span<const std::uint64_t> words) { return encode_val(ValCodec::fpc, words); }
EncodedStream encode_val_expmantissa_dod(std::span<const std::uint64_t> words) {
  return encode_val(ValCodec::exp_mantissa_dod, words);
}

std::vector<std::uint64_t> decode_val(const EncodedStream& stream, ValCodec codec) {
  if (stream.tag != stream_tag(codec)) fail(Errc::corruption, std::string("stream is not ") + to_string(codec) + " encoded");
  BitReader r(stream.payload);
  auto out = decode_val_payload(stream.tag, r, stream.count);
  detail::expect_exhausted(r);
  return out;
}

}  // namespace trt
