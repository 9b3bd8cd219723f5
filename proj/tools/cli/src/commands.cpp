#include "trtcli/commands.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <fstream>
#include <map>
#include <sstream>

#include "trt/error.hpp"
#include "trt/query/execute.hpp"
#include "trt/query/parser.hpp"
#include "trt/query/source.hpp"
#include "trt/store.hpp"
#include "trt/timefmt.hpp"
#include "trt/trtable_file.hpp"

namespace trt::cli {
namespace {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::not_found, "cannot open " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void require_store_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) fail(Errc::not_found, "no store at " + dir.string());
}

bool parse_int(std::string_view s, std::int64_t& out) {
  const auto* end = s.data() + s.size();
  const auto r = std::from_chars(s.data(), end, out);
  return r.ec == std::errc{} && r.ptr == end;
}

bool parse_double(std::string_view s, double& out) {
  const auto* end = s.data() + s.size();
  const auto r = std::from_chars(s.data(), end, out);
  return r.ec == std::errc{} && r.ptr == end;
}

bool parse_bool(std::string_view s, bool& out) {
  if (s == "true") {
    out = true;
  } else if (s == "false") {
    out = false;
  } else {
    return false;
  }
  return true;
}

std::optional<Value> parse_value(std::string_view s, ColumnType type) {
  switch (type) {
    case ColumnType::int64: {
      std::int64_t v = 0;
      if (parse_int(s, v)) return Value{v};
      return std::nullopt;
    }
    case ColumnType::float64: {
      double v = 0;
      if (parse_double(s, v)) return Value{v};
      return std::nullopt;
    }
    case ColumnType::boolean: {
      bool v = false;
      if (parse_bool(s, v)) return Value{v};
      return std::nullopt;
    }
    case ColumnType::string: return Value{std::string(s)};
  }
  return std::nullopt;
}

// Most specific type every non-empty value of the column parses as.
ColumnType infer_type(const std::vector<std::vector<std::string>>& records, std::size_t column) {
  bool is_int = true;
  bool is_float = true;
  bool is_bool = true;
  bool any = false;
  for (const auto& r : records) {
    if (column >= r.size() || r[column].empty()) continue;
    any = true;
    std::int64_t i = 0;
    double d = 0;
    bool b = false;
    is_int = is_int && parse_int(r[column], i);
    is_float = is_float && parse_double(r[column], d);
    is_bool = is_bool && parse_bool(r[column], b);
  }
  if (!any) return ColumnType::string;
  if (is_int) return ColumnType::int64;
  if (is_float) return ColumnType::float64;
  if (is_bool) return ColumnType::boolean;
  return ColumnType::string;
}

std::map<std::string, ColumnType> parse_type_overrides(const std::string& text) {
  std::map<std::string, ColumnType> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    const auto colon = item.find(':');
    if (colon == std::string::npos) fail(Errc::contract_violation, "type override '" + item + "' is not col:type");
    out[item.substr(0, colon)] = parse_column_type(item.substr(colon + 1));
  }
  return out;
}

}  // namespace

// ---- import ----------------------------------------------------------------

CsvDataset load_csv(const ImportOptions& options, std::ostream& log) {
  std::ifstream in(options.csv, std::ios::binary);
  if (!in) fail(Errc::not_found, "cannot open " + options.csv.string());
  CsvReader reader(in);
  std::vector<std::string> header;
  if (!reader.next(header)) fail(Errc::parse_error, options.csv.string() + ": missing header row");
  std::vector<std::vector<std::string>> records;
  std::vector<std::size_t> lines;
  std::vector<std::string> fields;
  while (reader.next(fields)) {
    records.push_back(fields);
    lines.push_back(reader.line());
  }

  std::size_t ts = 0;
  if (!options.ts_column.empty()) {
    const auto it = std::find(header.begin(), header.end(), options.ts_column);
    if (it == header.end()) fail(Errc::not_found, "no column '" + options.ts_column + "' in " + options.csv.string());
    ts = static_cast<std::size_t>(it - header.begin());
  }
  const auto overrides = parse_type_overrides(options.types);
  for (const auto& [name, type] : overrides) {
    if (std::find(header.begin(), header.end(), name) == header.end()) {
      fail(Errc::not_found, "type override for unknown column '" + name + "'");
    }
  }

  CsvDataset out;
  auto& schema = out.data.schema;
  schema.name = options.series;
  schema.precision = options.precision;
  schema.ts_codec = options.ts_codec;
  schema.val_codec = options.val_codec;
  schema.ingest = options.ingest;
  std::vector<std::size_t> source_columns;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c == ts) continue;
    const auto it = overrides.find(header[c]);
    schema.columns.push_back({header[c], it != overrides.end() ? it->second : infer_type(records, c)});
    source_columns.push_back(c);
  }
  schema.validate();

  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    std::string problem;
    Row row;
    if (r.size() != header.size()) {
      problem = "expected " + std::to_string(header.size()) + " fields, found " + std::to_string(r.size());
    } else {
      try {
        row.timestamp = parse_timestamp(r[ts], schema.precision).ticks;
      } catch (const Error& e) {
        problem = std::string("bad timestamp: ") + e.what();
      }
      for (std::size_t c = 0; problem.empty() && c < source_columns.size(); ++c) {
        auto v = parse_value(r[source_columns[c]], schema.columns[c].type);
        if (!v) {
          problem = "bad " + std::string(to_string(schema.columns[c].type)) + " value '" + r[source_columns[c]] +
                    "' in column " + schema.columns[c].name;
        } else {
          row.values.push_back(std::move(*v));
        }
      }
    }
    if (!problem.empty()) {
      const auto msg = options.csv.string() + " line " + std::to_string(lines[i]) + ": " + problem;
      if (options.strict) throw ParseError(lines[i], 1, options.csv.string() + ": " + problem);
      log << "skipped " << msg << '\n';
      ++out.skipped;
      continue;
    }
    out.data.rows.push_back(std::move(row));
  }
  return out;
}

ImportSummary cmd_import(const ImportOptions& options, std::ostream& log) {
  const auto started = std::chrono::steady_clock::now();
  auto csv = load_csv(options, log);
  auto store = Store::open(options.store);
  store->create_series(csv.data.schema);
  ImportSummary summary;
  summary.skipped = csv.skipped;
  for (auto& row : csv.data.rows) {
    if (store->insert(options.series, std::move(row)) == InsertStatus::accepted) {
      ++summary.accepted;
    } else {
      ++summary.rejected_late;
    }
  }
  store->flush(options.series);
  store->close();
  summary.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return summary;
}

// ---- query -----------------------------------------------------------------

query::MappingSet load_mappings(const fs::path& store, const std::vector<fs::path>& extra) {
  std::vector<fs::path> files;
  if (fs::is_directory(store)) {
    for (const auto& entry : fs::directory_iterator(store)) {
      if (entry.is_regular_file() && entry.path().extension() == ".map") files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  files.insert(files.end(), extra.begin(), extra.end());
  query::MappingSet set;
  for (const auto& f : files) {
    try {
      set.add(query::map_load(read_file(f), f.stem().string()));
    } catch (const ParseError& e) {
      throw ParseError(e.line(), e.column(), f.string() + ": " + e.what());
    }
  }
  return set;
}

query::ResultTable run_query(const QueryOptions& options, std::vector<std::string>* warnings) {
  require_store_dir(options.store);
  const auto plan = query::parse_query(options.text);
  const auto mappings = load_mappings(options.store, options.mappings);
  auto store = Store::open(options.store);
  query::StoreSource source(*store);
  for (const auto& name : mappings.names()) query::validate_mapping(mappings.get(name), source);
  query::ExecStats stats;
  auto result = query::execute(*plan, source, mappings, query::ExecOptions{options.pushdown, true}, &stats);
  if (warnings) warnings->assign(stats.warnings.begin(), stats.warnings.end());
  return result;
}

void write_table(const query::ResultTable& table, OutputFormat format, std::ostream& out) {
  write_record(out, table.columns, format);
  std::vector<std::string> fields;
  for (const auto& row : table.rows) {
    fields.clear();
    for (const auto& c : row) fields.push_back(query::to_text(c));
    write_record(out, fields, format);
  }
}

void cmd_query(const QueryOptions& options, std::ostream& out, std::ostream& log) {
  if (options.explain) {
    out << query::explain(*query::parse_query(options.text));
    return;
  }
  std::vector<std::string> warnings;
  const auto table = run_query(options, &warnings);
  for (const auto& w : warnings) log << "warning: " << w << '\n';
  write_table(table, options.format, out);
}

// ---- inspect ---------------------------------------------------------------

void cmd_inspect(const fs::path& store, const std::string& series, std::ostream& out) {
  require_store_dir(store);
  const auto path = store / (series + ".trt");
  if (!fs::exists(path)) fail(Errc::not_found, "no series '" + series + "' in " + store.string());
  RecoveryReport report;
  const auto file = TrTableFile::open(path, false, report);
  const auto& schema = file->schema();
  out << "series " << schema.name << '\n';
  out << "precision " << to_string(schema.precision) << '\n';
  out << "ts_codec " << to_string(schema.ts_codec) << '\n';
  out << "val_codec " << to_string(schema.val_codec) << '\n';
  out << "ingest q=" << schema.ingest.q << " a=" << schema.ingest.a << " b_size=" << schema.ingest.b_size << '\n';
  out << "columns";
  for (const auto& c : schema.columns) out << ' ' << c.name << ':' << to_string(c.type);
  out << '\n';
  if (report.scanned) {
    out << "recovered " << report.blocks_recovered << " blocks, discarded " << report.bytes_discarded << " bytes";
    if (!report.detail.empty()) out << " (" << report.detail << ")";
    out << '\n';
  }
  const auto& index = file->index();
  std::uint64_t rows = 0;
  for (const auto& e : index) rows += e.rows;
  out << "blocks " << index.size() << " rows " << rows << " file_bytes " << file->file_size() << '\n';
  for (std::size_t i = 0; i < index.size(); ++i) {
    const auto& e = index[i];
    out << "block " << i << " start " << format_rfc3339(e.start, schema.precision) << " end "
        << format_rfc3339(e.end, schema.precision) << " rows " << e.rows << " bytes " << e.length << " offset "
        << e.offset << '\n';
    for (std::size_t c = 0; c < e.columns.size() && c < schema.columns.size(); ++c) {
      const auto& s = e.columns[c];
      out << "  " << schema.columns[c].name;
      if (s.min) out << " min " << to_string(*s.min);
      if (s.max) out << " max " << to_string(*s.max);
      if (is_numeric(schema.columns[c].type)) out << " sum " << to_string(Value{s.sum});
      out << '\n';
    }
  }
  for (const auto& e : index) {
    const auto decoded = file->read_rows(e);
    if (decoded.size() != e.rows) {
      fail(Errc::corruption, "block at offset " + std::to_string(e.offset) + " decodes to " +
                                 std::to_string(decoded.size()) + " rows, index says " + std::to_string(e.rows));
    }
  }
  out << "checksums ok (" << index.size() << " blocks)\n";
}

// ---- gen -------------------------------------------------------------------

void write_dataset_csv(const Dataset& data, std::ostream& out) {
  std::vector<std::string> fields{"time"};
  for (const auto& c : data.schema.columns) fields.push_back(c.name);
  write_record(out, fields, OutputFormat::csv);
  for (const auto& r : data.rows) {
    fields.clear();
    fields.push_back(std::to_string(r.timestamp));
    for (const auto& v : r.values) fields.push_back(to_string(v));
    write_record(out, fields, OutputFormat::csv);
  }
}

void cmd_gen(const std::string& preset, const GenOptions& options, const fs::path& output) {
  const auto data = generate(preset, options);
  std::ofstream out(output, std::ios::binary);
  if (!out) fail(Errc::io_error, "cannot write " + output.string());
  write_dataset_csv(data, out);
  out.flush();
  if (!out) fail(Errc::io_error, "write failed for " + output.string());
}

}  // namespace trt::cli
