#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <limits>
#include <random>

#include "trt/codecs.hpp"
#include "trt/error.hpp"

namespace trt {
namespace {

constexpr TsCodec kTsCodecs[] = {TsCodec::dod, TsCodec::delta_rle_leb128, TsCodec::delta_rle_rice};
constexpr ValCodec kValCodecs[] = {ValCodec::gorilla, ValCodec::fpc, ValCodec::exp_mantissa_dod};
constexpr TimestampPrecision kPrecisions[] = {TimestampPrecision::seconds, TimestampPrecision::milliseconds,
                                              TimestampPrecision::nanoseconds};

std::vector<std::int64_t> random_timestamps(std::mt19937_64& rng, std::size_t n) {
  std::vector<std::int64_t> ts;
  std::int64_t t = static_cast<std::int64_t>(rng() % (std::uint64_t{1} << 40));
  for (std::size_t i = 0; i < n; ++i) {
    switch (rng() % 8) {
      case 0: break;                                                              // duplicate
      case 1: t += static_cast<std::int64_t>(rng() % (std::uint64_t{1} << 50)); break;  // wide gap
      default: t += static_cast<std::int64_t>(rng() % 5000); break;
    }
    ts.push_back(t);
  }
  return ts;
}

std::vector<std::uint64_t> random_words(std::mt19937_64& rng, std::size_t n) {
  std::vector<std::uint64_t> out;
  double walk = 20.0;
  for (std::size_t i = 0; i < n; ++i) {
    switch (rng() % 6) {
      case 0: out.push_back(rng()); break;  // any bit pattern, NaN payloads included
      case 1: out.push_back(rng() & 0x000FFFFFFFFFFFFF); break;  // subnormals
      case 2: out.push_back(out.empty() ? 0 : out.back()); break;
      default:
        walk += std::uniform_real_distribution<double>(-1, 1)(rng);
        out.push_back(to_word(walk));
        break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Worked examples

TEST(DodCodec, WorkedExampleTakesTenBits) {
  const std::int64_t t = 1496335840000;
  auto enc = make_timestamp_encoder(TsCodec::dod, TimestampPrecision::milliseconds);
  enc->append(t);
  enc->append(t + 3602);
  const auto before = enc->payload_bits();
  EXPECT_EQ(before, 64u + 24u);
  enc->append(t + 7202);
  enc->append(t + 10802);
  EXPECT_EQ(enc->payload_bits() - before, 10u);

  // '10' + 7-bit(-2 + 63) then '0'
  auto payload = enc->payload();
  BitReader r(payload);
  r.seek(88);
  EXPECT_EQ(r.read_bits(2), 0b10u);
  EXPECT_EQ(r.read_bits(7), 61u);
  EXPECT_EQ(r.read_bit(), false);
}

TEST(DodCodec, ConstantIntervalCostsOneBitPerElement) {
  std::vector<std::int64_t> ts;
  for (int i = 0; i < 1000; ++i) ts.push_back(1000 + 60 * i);
  auto s = encode_ts_dod(ts, TimestampPrecision::seconds);
  EXPECT_EQ(s.payload.size(), (64u + 14u + 998u + 7) / 8);
}

TEST(DodCodec, FirstDeltaOverflowUsesSentinel) {
  const std::vector<std::int64_t> ts{0, std::int64_t{1} << 20, (std::int64_t{1} << 20) + 5};
  auto s = encode_ts_dod(ts, TimestampPrecision::seconds);
  BitReader r(s.payload);
  r.seek(64);
  EXPECT_EQ(r.read_bits(14), (1u << 14) - 1);
  EXPECT_EQ(r.read_bits(64), std::uint64_t{1} << 20);
  EXPECT_EQ(decode_ts(s, TimestampPrecision::seconds), ts);
}

TEST(DodCodec, RejectsDecreasingInput) {
  const std::vector<std::int64_t> ts{10, 9};
  try {
    (void)encode_ts_dod(ts, TimestampPrecision::seconds);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::contract_violation);
  }
}

TEST(Leb128, WorkedExample) {
  BitWriter w;
  leb128_write(w, 3602);
  auto bytes = std::move(w).take();
  ASSERT_EQ(bytes.size(), 2u);
  EXPECT_EQ(bytes[0], 0x92);  // continuation bit + 0010010
  EXPECT_EQ(bytes[1], 0x1C);  // 0011100
  // 7-bit groups, most significant first: 0011100 0010010 = 3602
  const std::uint64_t joined = (std::uint64_t{bytes[1]} & 0x7F) << 7 | (bytes[0] & 0x7F);
  EXPECT_EQ(joined, 3602u);
  BitReader r(bytes);
  EXPECT_EQ(leb128_read(r), 3602u);
}

TEST(Leb128, RunLengthPairs) {
  const std::int64_t t = 1496335840000;
  const std::vector<std::int64_t> ts{t, t + 3602, t + 7202, t + 10802};
  auto s = encode_ts_delta_rle_leb128(ts, TimestampPrecision::milliseconds);
  BitReader r(s.payload);
  EXPECT_EQ(r.read_bits(64), static_cast<std::uint64_t>(t));
  EXPECT_EQ(leb128_read(r), 1u);
  EXPECT_EQ(leb128_read(r), 3602u);
  EXPECT_EQ(leb128_read(r), 2u);
  EXPECT_EQ(leb128_read(r), 3600u);
  EXPECT_EQ(r.remaining(), 0u);
}

TEST(Leb128, EqualDeltasCoalesceIntoOnePair) {
  std::vector<std::int64_t> ts;
  for (int i = 0; i < 500; ++i) ts.push_back(7 * i);
  auto s = encode_ts_delta_rle_leb128(ts, TimestampPrecision::seconds);
  BitReader r(s.payload);
  (void)r.read_bits(64);
  EXPECT_EQ(leb128_read(r), 499u);
  EXPECT_EQ(leb128_read(r), 7u);
  EXPECT_EQ(r.remaining(), 0u);
}

TEST(Rice, WorkedExampleQuotientAndRemainder) {
  AdaptiveRice rice(10);
  BitWriter w;
  rice.encode(w, 3602);
  EXPECT_EQ(w.bit_position(), 4u + 10u);
  auto bytes = std::move(w).take();
  BitReader r(bytes);
  EXPECT_EQ(r.read_bits(4), 0b1110u);
  EXPECT_EQ(r.read_bits(10), 530u);
  EXPECT_EQ(rice.k(), 13u);
}

TEST(Rice, ZeroValueDecrementsK) {
  AdaptiveRice rice(5);
  BitWriter w;
  rice.encode(w, 0);
  EXPECT_EQ(w.bit_position(), 6u);
  EXPECT_EQ(rice.k(), 4u);
  auto bytes = std::move(w).take();
  EXPECT_EQ(bytes[0], 0);
}

TEST(Rice, RunPairSequenceAdaptsK) {
  // The first pair (1, 3602) moves k from 2 and 10 to 1 and 13.
  const std::int64_t t = 1496335840000;
  const std::vector<std::int64_t> ts{t, t + 3602, t + 7202, t + 10802};
  auto s = encode_ts_delta_rle_rice(ts, TimestampPrecision::milliseconds);
  BitReader r(s.payload);
  EXPECT_EQ(r.read_bits(64), static_cast<std::uint64_t>(t));
  AdaptiveRice run_k(2);
  AdaptiveRice delta_k(10);
  EXPECT_EQ(run_k.decode(r), 1u);
  EXPECT_EQ(delta_k.decode(r), 3602u);
  EXPECT_EQ(run_k.k(), 1u);
  EXPECT_EQ(delta_k.k(), 13u);
  EXPECT_EQ(run_k.decode(r), 2u);
  EXPECT_EQ(delta_k.decode(r), 3600u);
  EXPECT_EQ(decode_ts(s, TimestampPrecision::milliseconds), ts);
}

TEST(Rice, EscapeForHugeQuotient) {
  AdaptiveRice enc(0);
  BitWriter w;
  enc.encode(w, std::uint64_t{1} << 60);
  EXPECT_EQ(w.bit_position(), AdaptiveRice::escape_quotient + 64u);
  EXPECT_EQ(enc.k(), 8u);
  auto bytes = std::move(w).take();
  BitReader r(bytes);
  AdaptiveRice dec(0);
  EXPECT_EQ(dec.decode(r), std::uint64_t{1} << 60);
  EXPECT_EQ(dec.k(), 8u);
}

TEST(Rice, KStaysWithinRange) {
  AdaptiveRice rice(63);
  BitWriter w;
  rice.encode(w, ~std::uint64_t{0});
  EXPECT_LE(rice.k(), 63u);
  AdaptiveRice low(0);
  low.encode(w, 0);
  EXPECT_EQ(low.k(), 0u);
}

TEST(Rice, PeriodicSecondsBeatDod) {
  std::vector<std::int64_t> ts;
  for (int i = 0; i < 10000; ++i) ts.push_back(1049155200 + 600 * i);
  auto rice = encode_ts_delta_rle_rice(ts, TimestampPrecision::seconds);
  auto dod = encode_ts_dod(ts, TimestampPrecision::seconds);
  EXPECT_LT(rice.serialized_size(), dod.serialized_size());
  EXPECT_LT(rice.serialized_size() * 10, ts.size() * 8);
}

// ---------------------------------------------------------------------------
// Value codecs

// Bit count of an XOR stream by the three-case rule, written out directly.
std::uint64_t gorilla_reference_bits(const std::vector<double>& values) {
  std::uint64_t bits = 64;
  int window_lead = -1;
  int window_trail = -1;
  for (std::size_t i = 1; i < values.size(); ++i) {
    const std::uint64_t x = std::bit_cast<std::uint64_t>(values[i]) ^ std::bit_cast<std::uint64_t>(values[i - 1]);
    if (x == 0) {
      bits += 1;
      continue;
    }
    const int lead = std::countl_zero(x);
    const int trail = std::countr_zero(x);
    if (window_lead >= 0 && lead >= window_lead && trail == window_trail) {
      bits += 2 + (64 - window_lead - window_trail);
    } else {
      bits += 2 + 6 + 6 + (64 - lead - trail);
      window_lead = lead;
      window_trail = trail;
    }
  }
  return bits;
}

TEST(Gorilla, WorkedValues) {
  const std::vector<double> values{30.0, 30.0, 30.5};
  auto words = to_words(values);
  auto enc = make_value_encoder(ValCodec::gorilla);
  for (auto w : words) enc->append(w);
  EXPECT_EQ(enc->payload_bits(), gorilla_reference_bits(values));
  // 30.0 ^ 30.5 = 0x0000800000000000: 16 leading, 47 trailing zeros.
  EXPECT_EQ(enc->payload_bits(), 64u + 1u + 2u + 6u + 6u + 1u);
  EXPECT_EQ(from_words(decode_val(enc->finish(), ValCodec::gorilla)), values);
}

TEST(Gorilla, RepeatCostsOneBit) {
  std::vector<double> values(100, 12.75);
  auto s = encode_val_gorilla(to_words(values));
  EXPECT_EQ(s.payload.size(), (64u + 99u + 7) / 8);
}

TEST(Gorilla, MatchesReferenceOnRandomWalks) {
  std::mt19937_64 rng(11);
  for (int round = 0; round < 20; ++round) {
    std::vector<double> values;
    double v = 15.0;
    for (int i = 0; i < 1000; ++i) {
      v += std::round(std::normal_distribution<double>(0, 1)(rng) * 10) / 10;
      values.push_back(v);
    }
    auto enc = make_value_encoder(ValCodec::gorilla);
    for (auto w : to_words(values)) enc->append(w);
    EXPECT_EQ(enc->payload_bits(), gorilla_reference_bits(values));
  }
}

TEST(Fpc, ConstantSeriesCostsFourBits) {
  auto enc = make_value_encoder(ValCodec::fpc);
  enc->append(to_word(21.5));
  for (int i = 0; i < 50; ++i) {
    const auto before = enc->payload_bits();
    enc->append(to_word(21.5));
    EXPECT_EQ(enc->payload_bits() - before, 4u);
  }
}

TEST(Fpc, IntegerRampPredictedFromThirdElement) {
  auto enc = make_value_encoder(ValCodec::fpc);
  std::vector<std::uint64_t> costs;
  for (std::uint64_t i = 0; i < 40; ++i) {
    const auto before = enc->payload_bits();
    enc->append(1000 + 37 * i);
    costs.push_back(enc->payload_bits() - before);
  }
  // Stride table: element 0 stores stride 1000, element 1 stores 37, from
  // element 2 the prediction 37 + previous is exact.
  EXPECT_GT(costs[1], 4u);
  for (std::size_t i = 2; i < costs.size(); ++i) EXPECT_EQ(costs[i], 4u) << i;
  auto s = enc->finish();
  BitReader r(s.payload);
  r.seek(costs[0] + costs[1]);
  EXPECT_EQ(r.read_bit(), true);  // dfcm selected
  EXPECT_EQ(r.read_bits(3), 6u);
}

TEST(Fpc, InvalidCodeIsCorruption) {
  BitWriter w;
  w.write_bit(false);
  w.write_bits(7, 3);
  w.write_bits(0, 4);
  EncodedStream s{StreamTag::val_fpc, 1, std::move(w).take()};
  try {
    (void)decode_val(s, ValCodec::fpc);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::corruption);
  }
}

TEST(ExpMantissa, RepeatCostsThreeBits) {
  auto enc = make_value_encoder(ValCodec::exp_mantissa_dod);
  enc->append(to_word(-3.25));
  const auto before = enc->payload_bits();
  enc->append(to_word(-3.25));
  EXPECT_EQ(enc->payload_bits() - before, 3u);
}

TEST(ExpMantissa, MinusSixtyThreeUsesSmallestClassWithZeroOffset) {
  const std::uint64_t first = to_word(1.0) | 1000;
  const std::uint64_t second = first - 63;
  auto s = encode_val_expmantissa_dod(std::vector<std::uint64_t>{first, second});
  BitReader r(s.payload);
  r.seek(64);
  EXPECT_EQ(r.read_bit(), false);  // sign
  EXPECT_EQ(r.read_bit(), false);  // exponent unchanged
  EXPECT_EQ(r.read_bits(2), 0b10u);
  EXPECT_EQ(r.read_bits(7), 0u);
  EXPECT_EQ(decode_val(s, ValCodec::exp_mantissa_dod), (std::vector<std::uint64_t>{first, second}));
}

TEST(ExpMantissa, ExponentJumpsWrap) {
  // Exponent delta-of-delta spans the whole field.
  const std::vector<double> values{1e-300, 1e300, 1e-300, -0.0, std::numeric_limits<double>::infinity(), 5e-324};
  auto words = to_words(values);
  EXPECT_EQ(decode_val(encode_val_expmantissa_dod(words), ValCodec::exp_mantissa_dod), words);
}

// ---------------------------------------------------------------------------
// Round trips and robustness

TEST(TimestampCodecs, RoundtripRandom) {
  std::mt19937_64 rng(1);
  for (auto codec : kTsCodecs) {
    for (auto p : kPrecisions) {
      auto ts = random_timestamps(rng, 10000);
      auto s = encode_ts(codec, ts, p);
      EXPECT_EQ(s.count, ts.size());
      EXPECT_EQ(decode_ts(s, p), ts) << to_string(codec);
      EXPECT_EQ(encode_ts(codec, ts, p), s);  // deterministic
    }
  }
}

TEST(TimestampCodecs, SingleElementAndExtremes) {
  const std::vector<std::vector<std::int64_t>> cases{
      {42},
      {std::numeric_limits<std::int64_t>::min(), std::numeric_limits<std::int64_t>::max()},
      {-5, -5, -5, 0, 0, 1},
      {0, std::numeric_limits<std::int64_t>::max() - 1, std::numeric_limits<std::int64_t>::max()},
  };
  for (auto codec : kTsCodecs) {
    for (const auto& ts : cases) {
      auto s = encode_ts(codec, ts, TimestampPrecision::nanoseconds);
      EXPECT_EQ(decode_ts(s, TimestampPrecision::nanoseconds), ts) << to_string(codec);
    }
  }
}

TEST(TimestampCodecs, HourlyMillisecondSeries) {
  const std::int64_t t = 1496335840000;
  const std::vector<std::int64_t> ts{t, t + 3602, t + 7202, t + 10802};
  for (auto codec : kTsCodecs) {
    EXPECT_EQ(decode_ts(encode_ts(codec, ts, TimestampPrecision::milliseconds), TimestampPrecision::milliseconds), ts);
  }
}

TEST(TimestampCodecs, TruncationIsDetected) {
  std::mt19937_64 rng(3);
  auto ts = random_timestamps(rng, 300);
  for (auto codec : kTsCodecs) {
    auto s = encode_ts(codec, ts, TimestampPrecision::milliseconds);
    s.payload.resize(s.payload.size() / 2);
    EXPECT_THROW((void)decode_ts(s, TimestampPrecision::milliseconds), Error);
  }
}

TEST(ValueCodecs, RoundtripRandom) {
  std::mt19937_64 rng(2);
  for (auto codec : kValCodecs) {
    auto words = random_words(rng, 100000);
    auto s = encode_val(codec, words);
    EXPECT_EQ(decode_val(s, codec), words) << to_string(codec);
    EXPECT_EQ(encode_val(codec, words), s);
  }
}

TEST(ValueCodecs, Adversarial) {
  const std::uint64_t max = ~std::uint64_t{0};
  std::vector<std::vector<std::uint64_t>> cases{
      {},
      {0},
      std::vector<std::uint64_t>(1000, to_word(3.0)),
      {0, max, 0, max, 0, max, 1, max - 1},
      {1, 2, 3, 0x000FFFFFFFFFFFFF, 0x8000000000000001},
      {0x7FF8000000000001, 0x7FF0000000000001, 0xFFF8DEADBEEF0000, 0x7FF0000000000000},
  };
  for (auto codec : kValCodecs) {
    for (const auto& words : cases) {
      EXPECT_EQ(decode_val(encode_val(codec, words), codec), words) << to_string(codec);
    }
  }
}

TEST(ValueCodecs, TagMismatchIsCorruption) {
  std::vector<std::uint64_t> words{1, 2, 3};
  auto s = encode_val_gorilla(words);
  try {
    (void)decode_val(s, ValCodec::fpc);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::corruption);
  }
}

TEST(ValueCodecs, ForeignPayloadNeverDecodesSilently) {
  std::mt19937_64 rng(5);
  int silent = 0;
  for (int round = 0; round < 300; ++round) {
    auto words = random_words(rng, 2 + rng() % 200);
    for (auto from : kValCodecs) {
      for (auto to : kValCodecs) {
        if (from == to) continue;
        auto s = encode_val(from, words);
        s.tag = stream_tag(to);
        try {
          auto out = decode_val(s, to);
          if (out.size() == words.size() && out != words) ++silent;
        } catch (const Error&) {
        }
      }
    }
  }
  EXPECT_EQ(silent, 0);
}

TEST(EncodedStream, SerializeParse) {
  auto s = encode_val_fpc(std::vector<std::uint64_t>{5, 6, 7});
  auto bytes = s.serialize();
  ASSERT_EQ(bytes.size(), s.serialized_size());
  EXPECT_EQ(bytes[0], 0x12);
  EXPECT_EQ(bytes[1], 3);
  EXPECT_EQ(bytes[2], 0);
  EXPECT_EQ(EncodedStream::parse(bytes), s);
}

TEST(Mad, Examples) {
  EXPECT_EQ(mad(std::vector<double>{10, 10, 10, 10}), 0.0);
  EXPECT_EQ(mad(std::vector<double>{1, 1, 2, 2, 4, 6, 9}), 1.0);
  EXPECT_EQ(mad(std::vector<double>{5}), 0.0);
  EXPECT_EQ(median({4, 1, 3, 2}), 2.5);
  EXPECT_THROW((void)mad(std::vector<double>{}), Error);
}

}  // namespace
}  // namespace trt
