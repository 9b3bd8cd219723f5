#include <benchmark/benchmark.h>

#include <filesystem>
#include <memory>
#include <random>

#include <unistd.h>

#include "trt/datagen.hpp"
#include "trt/store.hpp"

namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& tag) {
  return fs::temp_directory_path() /
         ("trt-bm-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(std::random_device{}()));
}

const trt::Dataset& shelburne() {
  static const trt::Dataset d = [] {
    trt::GenOptions o;
    o.rows = 200000;
    return trt::generate("shelburne-like", o);
  }();
  return d;
}

// One store per process for the read benchmarks, removed at exit.
struct LoadedStore {
  fs::path dir = scratch("read");
  std::unique_ptr<trt::Store> store;

  LoadedStore() {
    store = trt::Store::open(dir);
    store->create_series(shelburne().schema);
    for (const auto& r : shelburne().rows) (void)store->insert(shelburne().schema.name, r);
    store->flush(shelburne().schema.name);
  }
  ~LoadedStore() {
    store.reset();
    std::error_code ec;
    fs::remove_all(dir, ec);
  }
};

trt::Store& loaded_store() {
  static LoadedStore s;
  return *s.store;
}

void BM_Ingest(benchmark::State& state) {
  const auto& d = shelburne();
  auto schema = d.schema;
  schema.ingest.b_size = static_cast<std::uint32_t>(state.range(0));
  for (auto _ : state) {
    state.PauseTiming();
    const auto dir = scratch("ingest");
    auto store = trt::Store::open(dir);
    store->create_series(schema);
    state.ResumeTiming();
    for (const auto& r : d.rows) (void)store->insert(schema.name, r);
    store->flush(schema.name);
    state.PauseTiming();
    store.reset();
    fs::remove_all(dir);
    state.ResumeTiming();
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * d.rows.size()));
}
BENCHMARK(BM_Ingest)->Arg(16384)->Arg(65536)->Arg(1 << 20)->Unit(benchmark::kMillisecond);

void BM_FullScan(benchmark::State& state) {
  auto& store = loaded_store();
  const auto& name = shelburne().schema.name;
  for (auto _ : state) benchmark::DoNotOptimize(store.full_scan(name).collect());
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * shelburne().rows.size()));
}
BENCHMARK(BM_FullScan)->Unit(benchmark::kMillisecond);

// 100 fixed-seed ranges per iteration.
std::vector<std::pair<std::int64_t, std::int64_t>> ranges() {
  const auto& rows = shelburne().rows;
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<std::int64_t> pick(rows.front().timestamp, rows.back().timestamp);
  std::vector<std::pair<std::int64_t, std::int64_t>> out;
  for (int i = 0; i < 100; ++i) {
    auto a = pick(rng);
    auto b = pick(rng);
    out.emplace_back(std::min(a, b), std::max(a, b));
  }
  return out;
}

void BM_RangeQuery(benchmark::State& state) {
  auto& store = loaded_store();
  const auto& name = shelburne().schema.name;
  const auto rs = ranges();
  for (auto _ : state) {
    for (const auto& [a, b] : rs) benchmark::DoNotOptimize(store.query_range(name, a, b).collect());
  }
}
BENCHMARK(BM_RangeQuery)->Unit(benchmark::kMillisecond);

void BM_AggregateIndex(benchmark::State& state) {
  auto& store = loaded_store();
  const auto& schema = shelburne().schema;
  const auto rs = ranges();
  for (auto _ : state) {
    for (const auto& [a, b] : rs) {
      benchmark::DoNotOptimize(store.aggregate_range(schema.name, schema.columns[0].name, trt::AggFn::sum, a, b));
    }
  }
}
BENCHMARK(BM_AggregateIndex)->Unit(benchmark::kMillisecond);

void BM_AggregateScanFold(benchmark::State& state) {
  auto& store = loaded_store();
  const auto& name = shelburne().schema.name;
  const auto rs = ranges();
  for (auto _ : state) {
    for (const auto& [a, b] : rs) {
      double sum = 0;
      for (const auto& r : store.query_range(name, a, b).collect()) sum += std::get<double>(r.values[0]);
      benchmark::DoNotOptimize(sum);
    }
  }
}
BENCHMARK(BM_AggregateScanFold)->Unit(benchmark::kMillisecond);

}  // namespace
