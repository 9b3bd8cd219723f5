#include <benchmark/benchmark.h>

#include <vector>

#include "trt/codecs.hpp"
#include "trt/datagen.hpp"

namespace {

trt::Dataset dataset(const char* preset) {
  trt::GenOptions o;
  o.rows = 100000;
  return trt::generate(preset, o);
}

std::vector<std::int64_t> timestamps(const trt::Dataset& d) {
  std::vector<std::int64_t> out;
  for (const auto& r : d.rows) out.push_back(r.timestamp);
  return out;
}

std::vector<std::uint64_t> first_column(const trt::Dataset& d) {
  std::vector<std::uint64_t> out;
  for (const auto& r : d.rows) out.push_back(trt::to_word(std::get<double>(r.values[0])));
  return out;
}

// Arguments: preset index, codec.
const char* const kPresets[] = {"srbench-like", "shelburne-like"};

void BM_EncodeTimestamps(benchmark::State& state) {
  const auto d = dataset(kPresets[state.range(0)]);
  const auto ts = timestamps(d);
  const auto codec = static_cast<trt::TsCodec>(state.range(1));
  std::size_t bytes = 0;
  for (auto _ : state) {
    auto s = trt::encode_ts(codec, ts, d.schema.precision);
    bytes = s.serialized_size();
    benchmark::DoNotOptimize(s);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * ts.size()));
  state.counters["bits_per_ts"] = 8.0 * static_cast<double>(bytes) / static_cast<double>(ts.size());
  state.SetLabel(std::string(kPresets[state.range(0)]) + "/" + trt::to_string(codec));
}
BENCHMARK(BM_EncodeTimestamps)->ArgsProduct({{0, 1}, {0, 1, 2}});

void BM_DecodeTimestamps(benchmark::State& state) {
  const auto d = dataset(kPresets[state.range(0)]);
  const auto ts = timestamps(d);
  const auto codec = static_cast<trt::TsCodec>(state.range(1));
  const auto s = trt::encode_ts(codec, ts, d.schema.precision);
  for (auto _ : state) benchmark::DoNotOptimize(trt::decode_ts(s, d.schema.precision));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * ts.size()));
  state.SetLabel(std::string(kPresets[state.range(0)]) + "/" + trt::to_string(codec));
}
BENCHMARK(BM_DecodeTimestamps)->ArgsProduct({{0, 1}, {0, 1, 2}});

void BM_EncodeValues(benchmark::State& state) {
  const auto d = dataset(kPresets[state.range(0)]);
  const auto words = first_column(d);
  const auto codec = static_cast<trt::ValCodec>(state.range(1));
  std::size_t bytes = 0;
  for (auto _ : state) {
    auto s = trt::encode_val(codec, words);
    bytes = s.serialized_size();
    benchmark::DoNotOptimize(s);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * words.size()));
  state.counters["bits_per_value"] = 8.0 * static_cast<double>(bytes) / static_cast<double>(words.size());
  state.SetLabel(std::string(kPresets[state.range(0)]) + "/" + trt::to_string(codec));
}
BENCHMARK(BM_EncodeValues)->ArgsProduct({{0, 1}, {0, 1, 2}});

void BM_DecodeValues(benchmark::State& state) {
  const auto d = dataset(kPresets[state.range(0)]);
  const auto words = first_column(d);
  const auto codec = static_cast<trt::ValCodec>(state.range(1));
  const auto s = trt::encode_val(codec, words);
  for (auto _ : state) benchmark::DoNotOptimize(trt::decode_val(s, codec));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * words.size()));
  state.SetLabel(std::string(kPresets[state.range(0)]) + "/" + trt::to_string(codec));
}
BENCHMARK(BM_DecodeValues)->ArgsProduct({{0, 1}, {0, 1, 2}});

}  // namespace
