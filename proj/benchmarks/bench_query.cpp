#include <benchmark/benchmark.h>

#include <filesystem>
#include <random>

#include <unistd.h>

#include "trt/query/execute.hpp"
#include "trt/query/parser.hpp"
#include "trt/store.hpp"

namespace {

namespace fs = std::filesystem;

constexpr std::int64_t kStart = 1049155200;

const char* const kHourly = R"(SELECT ?time (AVG(?v) AS ?val) WHERE {
  ?sensor isA windSensor; has ?obs.
  ?obs hasValue ?v; hasTime ?time.
  FILTER (?time >= "2003-04-02T00:00:00Z"^^xsd:dateTime && ?time < "2003-04-02T06:00:00Z"^^xsd:dateTime)
} GROUP BY hours(?time))";

const char* const kUnion = R"(SELECT ?station WHERE {
  { ?station hasObservation ?obs . ?obs observes snowfall ; hasValue ?snow ; hasTime ?time .
    FILTER (?snow = true && ?time > "2003-04-01T01:00:00Z"^^xsd:dateTime && ?time < "2003-04-01T07:00:00Z"^^xsd:dateTime) }
  UNION
  { ?station hasObservation ?obs . ?obs observes rainfall ; hasValue ?rain ; hasTime ?time .
    FILTER (?rain > 30 && ?time > "2003-04-01T01:00:00Z"^^xsd:dateTime && ?time < "2003-04-01T07:00:00Z"^^xsd:dateTime) }
})";

const char* const kMapping = R"(@name wind
sensor1 isA windSensor
sensor1 has weatherObs1
weatherObs1 hasValue windSpeedVal
weatherObs1 hasTime obsTime
@bind windSpeedVal weatherTs.speed
@bind obsTime weatherTs.@time
)";

struct WindStore {
  fs::path dir = fs::temp_directory_path() /
                 ("trt-bm-query-" + std::to_string(::getpid()) + "-" + std::to_string(std::random_device{}()));
  std::unique_ptr<trt::Store> store;
  trt::query::MappingSet mappings;

  WindStore() {
    store = trt::Store::open(dir);
    trt::SeriesSchema s;
    s.name = "weatherTs";
    s.precision = trt::TimestampPrecision::seconds;
    s.columns = {{"speed", trt::ColumnType::float64}};
    s.ingest.b_size = 16384;
    store->create_series(s);
    std::mt19937_64 rng(1);
    double v = 20;
    // Three days of unevenly spaced readings.
    for (std::int64_t t = kStart; t < kStart + 3 * 86400; t += 1 + static_cast<std::int64_t>(rng() % 20)) {
      v = std::max(0.0, v + std::normal_distribution<double>(0, 1)(rng));
      (void)store->insert("weatherTs", trt::Row{t, {trt::Value{v}}});
    }
    store->flush("weatherTs");
    mappings.add(trt::query::map_load(kMapping));
  }
  ~WindStore() {
    store.reset();
    std::error_code ec;
    fs::remove_all(dir, ec);
  }
};

WindStore& wind() {
  static WindStore w;
  return w;
}

void BM_ParseHourly(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(trt::query::parse_query(kHourly));
}
BENCHMARK(BM_ParseHourly);

void BM_ParseUnion(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(trt::query::parse_query(kUnion));
}
BENCHMARK(BM_ParseUnion);

// Arguments: pushdown, aggregate fast path.
void BM_ExecuteHourly(benchmark::State& state) {
  auto& w = wind();
  const auto plan = trt::query::parse_query(kHourly);
  trt::query::StoreSource source(*w.store);
  const trt::query::ExecOptions options{state.range(0) != 0, state.range(1) != 0};
  for (auto _ : state) benchmark::DoNotOptimize(trt::query::execute(*plan, source, w.mappings, options));
}
BENCHMARK(BM_ExecuteHourly)->Args({1, 1})->Args({0, 1})->Unit(benchmark::kMicrosecond);

void BM_ExecuteWindowAverage(benchmark::State& state) {
  auto& w = wind();
  const auto plan = trt::query::parse_query(
      "SELECT (AVG(?v) AS ?m) WHERE { ?o hasValue ?v ; hasTime ?t . "
      "FILTER (?t >= \"2003-04-01T06:00:00Z\"^^xsd:dateTime && ?t < \"2003-04-03T06:00:00Z\"^^xsd:dateTime) }");
  trt::query::StoreSource source(*w.store);
  const trt::query::ExecOptions options{true, state.range(0) != 0};
  for (auto _ : state) benchmark::DoNotOptimize(trt::query::execute(*plan, source, w.mappings, options));
  state.SetLabel(state.range(0) ? "index" : "scan");
}
BENCHMARK(BM_ExecuteWindowAverage)->Arg(1)->Arg(0)->Unit(benchmark::kMicrosecond);

}  // namespace
BENCHMARK_MAIN();
