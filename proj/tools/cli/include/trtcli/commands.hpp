#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "trt/datagen.hpp"
#include "trt/query/model.hpp"
#include "trt/query/value.hpp"
#include "trt/schema.hpp"
#include "trtcli/csv.hpp"

namespace trt::cli {

// ---- import ----------------------------------------------------------------

struct ImportOptions {
  std::filesystem::path store;
  std::string series;
  std::filesystem::path csv;
  // Defaults to the first column.
  std::string ts_column;
  TimestampPrecision precision = TimestampPrecision::milliseconds;
  TsCodec ts_codec = TsCodec::dod;
  ValCodec val_codec = ValCodec::gorilla;
  IngestConfig ingest;
  // "col:type,..." overrides for inferred column types.
  std::string types;
  // Abort on the first unparseable row instead of skipping it.
  bool strict = false;
};

struct ImportSummary {
  std::uint64_t accepted = 0;
  std::uint64_t rejected_late = 0;
  std::uint64_t skipped = 0;
  double seconds = 0;
};

struct CsvDataset {
  Dataset data;  // rows in file order
  std::uint64_t skipped = 0;
};

// Parses the file into rows of a schema built from the options. Columns
// without an override are int64 when every value parses as an
// integer, float64 when every value is numeric, boolean for true/false and
// string otherwise. Skipped rows are reported on `log`; with `strict` the
// first one throws parse_error.
[[nodiscard]] CsvDataset load_csv(const ImportOptions& options, std::ostream& log);

// Ingests the file in file order. Importing into an existing series fails
// with already_exists.
ImportSummary cmd_import(const ImportOptions& options, std::ostream& log);

// ---- query -----------------------------------------------------------------

struct QueryOptions {
  std::filesystem::path store;
  std::string text;
  // Mapping files in addition to the *.map files in the store directory.
  std::vector<std::filesystem::path> mappings;
  OutputFormat format = OutputFormat::csv;
  bool pushdown = true;
  bool explain = false;
};

// Loads the store's *.map files (sorted by name) and the extra files. A file
// without an @name directive is named after its stem.
[[nodiscard]] query::MappingSet load_mappings(const std::filesystem::path& store,
                                              const std::vector<std::filesystem::path>& extra);

[[nodiscard]] query::ResultTable run_query(const QueryOptions& options, std::vector<std::string>* warnings = nullptr);

// Header row then one record per row; nulls print as empty fields.
void write_table(const query::ResultTable& table, OutputFormat format, std::ostream& out);

void cmd_query(const QueryOptions& options, std::ostream& out, std::ostream& log);

// ---- inspect ---------------------------------------------------------------

// Prints the schema, the block index and per-block aggregates, then reads
// every block to verify its checksum. Throws corruption on a bad block.
void cmd_inspect(const std::filesystem::path& store, const std::string& series, std::ostream& out);

// ---- gen -------------------------------------------------------------------

// Writes a header "time,<columns>" and one record per row with integer ticks.
void write_dataset_csv(const Dataset& data, std::ostream& out);

void cmd_gen(const std::string& preset, const GenOptions& options, const std::filesystem::path& output);

}  // namespace trt::cli
