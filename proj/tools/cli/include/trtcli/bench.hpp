#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "trt/datagen.hpp"
#include "trt/schema.hpp"

namespace trt::cli {

struct BenchOptions {
  // Empty: a temporary directory removed afterwards.
  std::filesystem::path store;
  TsCodec ts_codec = TsCodec::dod;
  ValCodec val_codec = ValCodec::gorilla;
  IngestConfig ingest;
  std::size_t ranges = 100;
  std::size_t repetitions = 5;
  std::uint64_t seed = 42;
  // Compare range, scan and aggregate answers with the naive store.
  bool verify = false;
  // Also ingest with b_size = 4096 * 2^x for every x in sweep_exponents.
  bool bsize_sweep = false;
  std::vector<int> sweep_exponents = {2, 3, 4, 5, 6, 7, 8};
  // Reader threads issuing range queries while the writer ingests.
  std::size_t readers = 0;
};

// Whole-column stream size under one codec.
struct CodecSize {
  std::string kind;  // "timestamp" or "value"
  std::string codec;
  std::uint64_t bytes = 0;
  double bits_per_value = 0;
};

struct SweepPoint {
  int exponent = 0;
  std::uint32_t b_size = 0;
  std::uint64_t db_bytes = 0;
  std::size_t blocks = 0;
  double ingest_rows_per_s = 0;
  double full_scan_ms = 0;
};

struct BenchReport {
  std::string dataset;
  std::uint64_t rows = 0;
  std::uint64_t raw_bytes = 0;  // 8 bytes per timestamp and value
  std::vector<CodecSize> codec_sizes;
  std::uint64_t rows_accepted = 0;
  std::uint64_t rows_rejected_late = 0;
  double ingest_seconds = 0;
  double ingest_rows_per_s = 0;
  double full_scan_ms = 0;
  std::size_t ranges = 0;
  double range_query_ms = 0;
  double aggregate_query_ms = 0;
  std::uint64_t reader_queries = 0;
  // Sum of file sizes in the store directory after closing.
  std::uint64_t db_bytes = 0;
  std::size_t blocks = 0;
  bool verified = false;
  std::uint64_t mismatches = 0;
  std::vector<SweepPoint> sweep;
};

// Runs ingestion, full scans, random range and aggregate queries and the
// per-codec size measurement. Timings are means over the repetitions, range
// timings means over all ranges.
[[nodiscard]] BenchReport run_bench(const Dataset& data, const BenchOptions& options);

// Ingests the dataset once per exponent into fresh series and measures size
// and speed.
[[nodiscard]] std::vector<SweepPoint> bsize_sweep(const Dataset& data, const BenchOptions& options,
                                                  const std::filesystem::path& dir);

// Sizes of the timestamp column under every timestamp codec and of all
// numeric columns under every value codec.
[[nodiscard]] std::vector<CodecSize> codec_sizes(const Dataset& data);

[[nodiscard]] std::string to_json(const BenchReport& report);
[[nodiscard]] std::string to_text(const BenchReport& report);

}  // namespace trt::cli
