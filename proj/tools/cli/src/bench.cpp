#include "trtcli/bench.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <charconv>
#include <chrono>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>
#include <thread>

#include <unistd.h>

#include "json.hpp"
#include "trt/codecs.hpp"
#include "trt/error.hpp"
#include "trt/oracle/naive_store.hpp"
#include "trt/store.hpp"

namespace trt::cli {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

constexpr const char* kSeries = "bench";

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Removes the directory on destruction when it was created here.
class ScratchDir {
 public:
  explicit ScratchDir(const fs::path& requested) {
    if (!requested.empty()) {
      path_ = requested;
      return;
    }
    path_ = fs::temp_directory_path() /
            ("trt-bench-" + std::to_string(::getpid()) + "-" + std::to_string(std::random_device{}()));
    owned_ = true;
  }
  ~ScratchDir() {
    if (!owned_) return;
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;

  [[nodiscard]] const fs::path& path() const noexcept { return path_; }

 private:
  fs::path path_;
  bool owned_ = false;
};

SeriesSchema bench_schema(const Dataset& data, const BenchOptions& options, const std::string& name,
                          std::uint32_t b_size) {
  auto s = data.schema;
  s.name = name;
  s.ts_codec = options.ts_codec;
  s.val_codec = options.val_codec;
  s.ingest = options.ingest;
  s.ingest.b_size = b_size;
  return s;
}

struct Range {
  std::int64_t start;
  std::int64_t end;
};

std::vector<Range> random_ranges(const Dataset& data, std::size_t count, std::uint64_t seed) {
  std::vector<Range> out;
  if (data.rows.empty()) return out;
  const auto [lo_row, hi_row] = std::minmax_element(
      data.rows.begin(), data.rows.end(), [](const Row& a, const Row& b) { return a.timestamp < b.timestamp; });
  const auto lo = lo_row->timestamp;
  const auto hi = hi_row->timestamp;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::int64_t> pick(lo, hi);
  for (std::size_t i = 0; i < count; ++i) {
    auto a = pick(rng);
    auto b = pick(rng);
    if (a > b) std::swap(a, b);
    out.push_back({a, b});
  }
  return out;
}

std::optional<std::size_t> first_numeric_column(const SeriesSchema& schema) {
  for (std::size_t c = 0; c < schema.columns.size(); ++c) {
    if (is_numeric(schema.columns[c].type)) return c;
  }
  return std::nullopt;
}

bool same_value(const Value& a, const Value& b) {
  if (a.index() != b.index()) return false;
  if (const auto* x = std::get_if<double>(&a)) return to_word(*x) == to_word(std::get<double>(b));
  return a == b;
}

bool same_rows(const std::vector<Row>& a, const std::vector<Row>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].timestamp != b[i].timestamp || a[i].values.size() != b[i].values.size()) return false;
    for (std::size_t c = 0; c < a[i].values.size(); ++c) {
      if (!same_value(a[i].values[c], b[i].values[c])) return false;
    }
  }
  return true;
}

std::optional<Value> try_aggregate(const std::function<Value()>& f) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.code() != Errc::empty_aggregate) throw;
    return std::nullopt;
  }
}

bool same_aggregate(const std::optional<Value>& a, const std::optional<Value>& b, AggFn fn) {
  if (a.has_value() != b.has_value()) return false;
  if (!a) return true;
  if (fn != AggFn::sum && fn != AggFn::avg) return same_value(*a, *b);
  const double x = as_double(*a);
  const double y = as_double(*b);
  if (std::isnan(x) || std::isnan(y)) return std::isnan(x) && std::isnan(y);
  return std::abs(x - y) <= 1e-9 * std::max(1.0, std::abs(y));
}

std::string number(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace

std::vector<CodecSize> codec_sizes(const Dataset& data) {
  std::vector<CodecSize> out;
  std::vector<std::int64_t> times;
  times.reserve(data.rows.size());
  for (const auto& r : data.rows) times.push_back(r.timestamp);
  const auto per_value = [](std::uint64_t bytes, std::size_t count) {
    return count == 0 ? 0.0 : 8.0 * static_cast<double>(bytes) / static_cast<double>(count);
  };
  for (const auto codec : {TsCodec::dod, TsCodec::delta_rle_leb128, TsCodec::delta_rle_rice}) {
    const auto bytes = encode_ts(codec, times, data.schema.precision).serialized_size();
    out.push_back({"timestamp", to_string(codec), bytes, per_value(bytes, data.rows.size())});
  }
  std::vector<std::vector<std::uint64_t>> columns;
  for (std::size_t c = 0; c < data.schema.columns.size(); ++c) {
    if (!is_numeric(data.schema.columns[c].type)) continue;
    std::vector<std::uint64_t> words;
    words.reserve(data.rows.size());
    for (const auto& r : data.rows) {
      const auto& v = r.values[c];
      if (const auto* d = std::get_if<double>(&v)) {
        words.push_back(to_word(*d));
      } else if (const auto* i = std::get_if<std::int64_t>(&v)) {
        words.push_back(static_cast<std::uint64_t>(*i));
      } else {
        words.push_back(std::get<bool>(v) ? 1 : 0);
      }
    }
    columns.push_back(std::move(words));
  }
  for (const auto codec : {ValCodec::gorilla, ValCodec::fpc, ValCodec::exp_mantissa_dod}) {
    std::uint64_t bytes = 0;
    for (const auto& words : columns) bytes += encode_val(codec, words).serialized_size();
    out.push_back({"value", to_string(codec), bytes, per_value(bytes, data.rows.size() * columns.size())});
  }
  return out;
}

std::vector<SweepPoint> bsize_sweep(const Dataset& data, const BenchOptions& options, const fs::path& dir) {
  std::vector<SweepPoint> out;
  for (const int x : options.sweep_exponents) {
    require(x >= 0 && x < 20, "sweep exponent out of range");
    SweepPoint p;
    p.exponent = x;
    p.b_size = 4096U << static_cast<unsigned>(x);
    const auto sub = dir / ("sweep-b" + std::to_string(p.b_size));
    {
      auto store = Store::open(sub);
      const auto schema = bench_schema(data, options, kSeries, p.b_size);
      store->create_series(schema);
      const auto started = Clock::now();
      for (const auto& r : data.rows) (void)store->insert(kSeries, r);
      store->flush(kSeries);
      const auto secs = seconds_since(started);
      p.ingest_rows_per_s = secs > 0 ? static_cast<double>(data.rows.size()) / secs : 0;
      const auto scan_start = Clock::now();
      (void)store->full_scan(kSeries).collect();
      p.full_scan_ms = 1e3 * seconds_since(scan_start);
      p.blocks = store->stats(kSeries).blocks;
      store->close();
    }
    p.db_bytes = fs::file_size(sub / (std::string(kSeries) + ".trt"));
    out.push_back(p);
  }
  return out;
}

BenchReport run_bench(const Dataset& data, const BenchOptions& options) {
  require(options.repetitions >= 1, "repetitions must be at least 1");
  ScratchDir dir(options.store);
  BenchReport rep;
  rep.rows = data.rows.size();
  rep.raw_bytes = 8 * rep.rows * (1 + data.schema.columns.size());
  rep.codec_sizes = codec_sizes(data);

  const auto schema = bench_schema(data, options, kSeries, options.ingest.b_size);
  oracle::NaiveStore naive;
  naive.create_series(schema);
  const auto ranges = random_ranges(data, options.ranges, options.seed);
  rep.ranges = ranges.size();
  const auto agg_column = first_numeric_column(schema);

  auto store = Store::open(dir.path());
  store->create_series(schema);

  std::atomic<bool> ingesting{true};
  std::atomic<std::uint64_t> reader_queries{0};
  std::vector<std::thread> readers;
  for (std::size_t i = 0; i < options.readers && !ranges.empty(); ++i) {
    readers.emplace_back([&, i] {
      std::size_t k = i;
      while (ingesting.load()) {
        const auto& r = ranges[k++ % ranges.size()];
        (void)store->query_range(kSeries, r.start, r.end).collect();
        reader_queries.fetch_add(1);
      }
    });
  }
  const auto started = Clock::now();
  for (const auto& r : data.rows) {
    if (store->insert(kSeries, r) == InsertStatus::accepted) {
      ++rep.rows_accepted;
      if (options.verify) naive.insert(kSeries, r);
    } else {
      ++rep.rows_rejected_late;
    }
  }
  store->flush(kSeries);
  rep.ingest_seconds = seconds_since(started);
  ingesting = false;
  for (auto& t : readers) t.join();
  rep.reader_queries = reader_queries.load();
  rep.ingest_rows_per_s = rep.ingest_seconds > 0 ? static_cast<double>(rep.rows) / rep.ingest_seconds : 0;

  double scan_total = 0;
  for (std::size_t i = 0; i < options.repetitions; ++i) {
    const auto t0 = Clock::now();
    const auto rows = store->full_scan(kSeries).collect();
    scan_total += seconds_since(t0);
    if (options.verify && i == 0 && !same_rows(rows, naive.full_scan(kSeries))) ++rep.mismatches;
  }
  rep.full_scan_ms = 1e3 * scan_total / static_cast<double>(options.repetitions);

  if (!ranges.empty()) {
    double range_total = 0;
    for (const auto& r : ranges) {
      const auto t0 = Clock::now();
      const auto rows = store->query_range(kSeries, r.start, r.end).collect();
      range_total += seconds_since(t0);
      if (options.verify && !same_rows(rows, naive.query_range(kSeries, r.start, r.end))) ++rep.mismatches;
    }
    rep.range_query_ms = 1e3 * range_total / static_cast<double>(ranges.size());

    if (agg_column) {
      const auto& column = schema.columns[*agg_column].name;
      double agg_total = 0;
      for (const auto& r : ranges) {
        const auto t0 = Clock::now();
        (void)try_aggregate([&] { return store->aggregate_range(kSeries, column, AggFn::avg, r.start, r.end); });
        agg_total += seconds_since(t0);
        if (!options.verify) continue;
        for (const auto fn : {AggFn::count, AggFn::sum, AggFn::avg, AggFn::min, AggFn::max}) {
          const auto a = try_aggregate([&] { return store->aggregate_range(kSeries, column, fn, r.start, r.end); });
          const auto b = try_aggregate([&] { return naive.aggregate(kSeries, column, fn, r.start, r.end); });
          if (!same_aggregate(a, b, fn)) ++rep.mismatches;
        }
      }
      rep.aggregate_query_ms = 1e3 * agg_total / static_cast<double>(ranges.size());
    }
  }
  rep.blocks = store->stats(kSeries).blocks;
  store->close();
  store.reset();
  rep.db_bytes = fs::file_size(dir.path() / (std::string(kSeries) + ".trt"));
  rep.verified = options.verify;

  if (options.bsize_sweep) rep.sweep = bsize_sweep(data, options, dir.path());
  return rep;
}

std::string to_json(const BenchReport& r) {
  nlohmann::ordered_json j;
  j["dataset"] = r.dataset;
  j["rows"] = r.rows;
  j["raw_bytes"] = r.raw_bytes;
  auto& sizes = j["codec_sizes"] = nlohmann::ordered_json::array();
  for (const auto& c : r.codec_sizes) {
    sizes.push_back({{"kind", c.kind}, {"codec", c.codec}, {"bytes", c.bytes}, {"bits_per_value", c.bits_per_value}});
  }
  j["rows_accepted"] = r.rows_accepted;
  j["rows_rejected_late"] = r.rows_rejected_late;
  j["ingest_seconds"] = r.ingest_seconds;
  j["ingest_rows_per_s"] = r.ingest_rows_per_s;
  j["reader_queries"] = r.reader_queries;
  j["full_scan_ms"] = r.full_scan_ms;
  j["ranges"] = r.ranges;
  j["range_query_ms"] = r.range_query_ms;
  j["aggregate_query_ms"] = r.aggregate_query_ms;
  j["db_bytes"] = r.db_bytes;
  j["blocks"] = r.blocks;
  j["verified"] = r.verified;
  j["mismatches"] = r.mismatches;
  auto& sweep = j["sweep"] = nlohmann::ordered_json::array();
  for (const auto& p : r.sweep) {
    sweep.push_back({{"exponent", p.exponent},
                     {"b_size", p.b_size},
                     {"db_bytes", p.db_bytes},
                     {"blocks", p.blocks},
                     {"ingest_rows_per_s", p.ingest_rows_per_s},
                     {"full_scan_ms", p.full_scan_ms}});
  }
  return j.dump(2) + "\n";
}

std::string to_text(const BenchReport& r) {
  std::ostringstream out;
  out << "dataset " << r.dataset << "\n";
  out << "rows " << r.rows << "\n";
  out << "raw_bytes " << r.raw_bytes << "\n";
  for (const auto& c : r.codec_sizes) {
    out << "codec " << c.kind << ' ' << c.codec << " bytes " << c.bytes << " bits_per_value "
        << number(c.bits_per_value) << "\n";
  }
  out << "rows_accepted " << r.rows_accepted << "\n";
  out << "rows_rejected_late " << r.rows_rejected_late << "\n";
  out << "ingest_seconds " << number(r.ingest_seconds) << "\n";
  out << "ingest_rows_per_s " << number(r.ingest_rows_per_s) << "\n";
  out << "reader_queries " << r.reader_queries << "\n";
  out << "full_scan_ms " << number(r.full_scan_ms) << "\n";
  out << "ranges " << r.ranges << "\n";
  out << "range_query_ms " << number(r.range_query_ms) << "\n";
  out << "aggregate_query_ms " << number(r.aggregate_query_ms) << "\n";
  out << "db_bytes " << r.db_bytes << "\n";
  out << "blocks " << r.blocks << "\n";
  out << "verified " << (r.verified ? "true" : "false") << "\n";
  out << "mismatches " << r.mismatches << "\n";
  for (const auto& p : r.sweep) {
    out << "sweep exponent " << p.exponent << " b_size " << p.b_size << " db_bytes " << p.db_bytes << " blocks "
        << p.blocks << " ingest_rows_per_s " << number(p.ingest_rows_per_s) << " full_scan_ms "
        << number(p.full_scan_ms) << "\n";
  }
  return out.str();
}

}  // namespace trt::cli
