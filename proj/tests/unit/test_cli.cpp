#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include <sys/stat.h>

#include "json.hpp"
#include "support/query_fixtures.hpp"
#include "support/temp_dir.hpp"
#include "trt/datagen.hpp"
#include "trt/error.hpp"
#include "trt/query/execute.hpp"
#include "trt/query/parser.hpp"
#include "trt/store.hpp"
#include "trtcli/app.hpp"
#include "trtcli/bench.hpp"
#include "trtcli/commands.hpp"
#include "trtcli/csv.hpp"

namespace trt::cli {
namespace {

namespace fs = std::filesystem;

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run trt_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "trt");
  std::ostringstream out;
  std::ostringstream err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_csv(const fs::path& p, const Dataset& d) {
  std::ofstream out(p, std::ios::binary);
  write_dataset_csv(d, out);
}

Dataset as_dataset(const testing::SeriesData& s) { return Dataset{s.schema, s.rows}; }

// ---- CSV -------------------------------------------------------------------

TEST(Csv, QuotedFieldsRoundTrip) {
  const std::vector<std::string> fields = {"plain", "with,comma", "with \"quote\"", "two\nlines", ""};
  std::ostringstream out;
  write_record(out, fields, OutputFormat::csv);
  std::istringstream in(out.str() + "\nnext,row\n");
  CsvReader reader(in);
  std::vector<std::string> got;
  ASSERT_TRUE(reader.next(got));
  EXPECT_EQ(got, fields);
  EXPECT_EQ(reader.line(), 1U);
  ASSERT_TRUE(reader.next(got));
  EXPECT_EQ(got, (std::vector<std::string>{"next", "row"}));
  EXPECT_EQ(reader.line(), 4U);
  EXPECT_FALSE(reader.next(got));
}

TEST(Csv, UnterminatedQuoteIsAParseError) {
  std::istringstream in("a,\"b\nc\n");
  CsvReader reader(in);
  std::vector<std::string> got;
  EXPECT_THROW((void)reader.next(got), ParseError);
}

TEST(Csv, TsvEscapesSeparators) {
  std::ostringstream out;
  write_record(out, {"a\tb", "c\\d", "e\nf"}, OutputFormat::tsv);
  EXPECT_EQ(out.str(), "a\\tb\tc\\\\d\te\\nf\n");
}

// ---- import ----------------------------------------------------------------

TEST(CliImport, SortedFileIngestsWithoutRejections) {
  testing::TempDir dir;
  GenOptions o;
  o.rows = 10000;
  const auto data = generate("srbench-like", o);
  write_csv(dir / "d.csv", data);
  const auto r = trt_cli({"import", "--store", (dir / "st").string(), "--series", "w", "--csv",
                          (dir / "d.csv").string(), "--precision", "s", "--ts-codec", "rice"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("accepted 10000 rejected_late 0 skipped 0"), std::string::npos) << r.out;
  auto store = Store::open(dir / "st");
  const auto rows = store->full_scan("w").collect();
  EXPECT_EQ(rows, data.rows);
  EXPECT_EQ(store->schema("w").ts_codec, TsCodec::delta_rle_rice);
}

TEST(CliImport, ShuffleWithinTheReorderWindowIsAbsorbed) {
  testing::TempDir dir;
  GenOptions o;
  o.rows = 20000;
  auto data = generate("shelburne-like", o);
  const auto sorted = data.rows;
  // Window below (1 - a) * q = 682 for the defaults.
  bounded_shuffle(data.rows, 600, 3);
  ASSERT_NE(data.rows, sorted);
  write_csv(dir / "d.csv", data);
  const auto r = trt_cli({"import", "--store", (dir / "st").string(), "--series", "s", "--csv",
                          (dir / "d.csv").string(), "--precision", "ns"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("rejected_late 0"), std::string::npos) << r.out;
  auto store = Store::open(dir / "st");
  const auto rows = store->full_scan("s").collect();
  ASSERT_EQ(rows.size(), sorted.size());
  for (std::size_t i = 0; i < rows.size(); ++i) ASSERT_EQ(rows[i].timestamp, sorted[i].timestamp);
}

TEST(CliImport, ReimportIsRejected) {
  testing::TempDir dir;
  write_csv(dir / "d.csv", generate("taxi-like", GenOptions{}));
  const std::vector<std::string> args = {"import", "--store", (dir / "st").string(), "--series", "t", "--csv",
                                         (dir / "d.csv").string(), "--precision", "s"};
  ASSERT_EQ(trt_cli(args).code, 0);
  const auto again = trt_cli(args);
  EXPECT_EQ(again.code, exit_data);
  EXPECT_NE(again.err.find("already exists"), std::string::npos);
}

TEST(CliImport, BadRowsAreSkippedOrAbort) {
  testing::TempDir dir;
  {
    std::ofstream out(dir / "d.csv");
    out << "when,v,flag,name\n"
        << "2003-04-01T00:00:00Z,1.5,true,a\n"
        << "2003-04-01T00:00:01Z,2,false,b\n"
        << "not a time,3,true,c\n"
        << "2003-04-01T00:00:03Z,4,true\n"
        << "2003-04-01T00:00:04Z,x,true,d\n"
        << "1049155205000,5.5,false,\"e,f\"\n";
  }
  const auto r = trt_cli({"import", "--store", (dir / "st").string(), "--series", "m", "--csv",
                          (dir / "d.csv").string(), "--ts-column", "when", "--types", "v:float64"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("accepted 3 rejected_late 0 skipped 3"), std::string::npos) << r.out;
  EXPECT_NE(r.err.find("line 4"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("line 6"), std::string::npos) << r.err;
  auto store = Store::open(dir / "st");
  const auto schema = store->schema("m");
  ASSERT_EQ(schema.columns.size(), 3U);
  EXPECT_EQ(schema.columns[0].type, ColumnType::float64);
  EXPECT_EQ(schema.columns[1].type, ColumnType::boolean);
  EXPECT_EQ(schema.columns[2].type, ColumnType::string);
  const auto rows = store->full_scan("m").collect();
  ASSERT_EQ(rows.size(), 3U);
  EXPECT_EQ(rows[2].timestamp, 1049155205000);
  EXPECT_EQ(rows[2].values[2], Value{std::string("e,f")});

  const auto strict = trt_cli({"import", "--store", (dir / "st2").string(), "--series", "m", "--csv",
                               (dir / "d.csv").string(), "--ts-column", "when", "--strict"});
  EXPECT_EQ(strict.code, exit_data);
  EXPECT_NE(strict.err.find("line 4"), std::string::npos) << strict.err;
}

TEST(CliImport, UsageErrors) {
  testing::TempDir dir;
  write_csv(dir / "d.csv", generate("taxi-like", GenOptions{}));
  EXPECT_EQ(trt_cli({}).code, exit_usage);
  EXPECT_EQ(trt_cli({"nope"}).code, exit_usage);
  EXPECT_EQ(trt_cli({"import", "--store", (dir / "st").string(), "--csv", (dir / "d.csv").string()}).code, exit_usage);
  EXPECT_EQ(trt_cli({"import", "--store", (dir / "st").string(), "--series", "x", "--csv", (dir / "d.csv").string(),
                     "--ts-codec", "zip"})
                .code,
            exit_usage);
  EXPECT_EQ(trt_cli({"import", "--store", (dir / "st").string(), "--series", "x", "--csv", (dir / "d.csv").string(),
                     "--a", "1.5"})
                .code,
            exit_usage);
  EXPECT_EQ(trt_cli({"--help"}).code, exit_ok);
}

// ---- query -----------------------------------------------------------------

struct WindStore {
  testing::TempDir dir;
  fs::path store;
  testing::SeriesData data = testing::wind_series(6);

  WindStore() : store(dir / "st") {
    write_csv(dir / "w.csv", as_dataset(data));
    const auto r = trt_cli({"import", "--store", store.string(), "--series", "weatherTs", "--csv",
                            (dir / "w.csv").string(), "--precision", "s", "--types", "windSpeedCol:float64"});
    EXPECT_EQ(r.code, 0) << r.err;
    std::ofstream(store / "wind.map") << testing::kWindMapping;
  }
};

TEST(CliQuery, HourlyWindPrintsTheLibraryResult) {
  WindStore w;
  const auto r = trt_cli({"query", "--store", w.store.string(), "-e", testing::kHourlyWindQuery});
  ASSERT_EQ(r.code, 0) << r.err;

  auto store = Store::open(w.store);
  query::StoreSource source(*store);
  query::MappingSet mappings;
  mappings.add(query::map_load(testing::kWindMapping));
  const auto table = query::execute(*query::parse_query(testing::kHourlyWindQuery), source, mappings);
  std::ostringstream want;
  write_table(table, OutputFormat::csv, want);
  EXPECT_EQ(r.out, want.str());
  ASSERT_EQ(table.rows.size(), 1U);

  // Hourly averages over the whole series, one line per hour plus the header.
  const auto hourly = trt_cli({"query", "--store", w.store.string(), "--format", "tsv", "-e",
                               "SELECT ?time (AVG(?v) AS ?val) WHERE { ?o hasValue ?v ; hasTime ?time } "
                               "GROUP BY hours(?time)"});
  ASSERT_EQ(hourly.code, 0) << hourly.err;
  EXPECT_EQ(std::count(hourly.out.begin(), hourly.out.end(), '\n'), 7);
  EXPECT_EQ(hourly.out.substr(0, 9), "time\tval\n");
}

TEST(CliQuery, QueryFromFileAndExtraMapping) {
  WindStore w;
  fs::rename(w.store / "wind.map", w.dir / "elsewhere.map");
  std::ofstream(w.dir / "q.rq") << "SELECT (COUNT(*) AS ?n) WHERE { ?o hasValue ?v }";
  const auto missing = trt_cli({"query", "--store", w.store.string(), "-f", (w.dir / "q.rq").string()});
  ASSERT_EQ(missing.code, 0) << missing.err;
  EXPECT_EQ(missing.out, "n\n");
  const auto r = trt_cli({"query", "--store", w.store.string(), "-f", (w.dir / "q.rq").string(), "-m",
                          (w.dir / "elsewhere.map").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "n\n" + std::to_string(w.data.rows.size()) + "\n");
}

TEST(CliQuery, SyntaxErrorsReportThePosition) {
  WindStore w;
  const auto r = trt_cli({"query", "--store", w.store.string(), "-e", "SELECT ?v WHERE {\n  ?o hasValue\n}"});
  EXPECT_EQ(r.code, exit_data);
  EXPECT_NE(r.err.find("line 3, column 1"), std::string::npos) << r.err;
  EXPECT_TRUE(r.out.empty());

  const auto unsupported = trt_cli({"query", "--store", w.store.string(), "-e",
                                    "SELECT ?v WHERE { ?o hasValue/hasTime ?v }"});
  EXPECT_EQ(unsupported.code, exit_data);
  EXPECT_NE(unsupported.err.find("not supported"), std::string::npos) << unsupported.err;

  EXPECT_EQ(trt_cli({"query", "--store", w.store.string()}).code, exit_usage);
  EXPECT_EQ(trt_cli({"query", "--store", (w.dir / "none").string(), "-e", "SELECT * WHERE { ?a ?b ?c }"}).code,
            exit_data);
}

TEST(CliQuery, MappingToAMissingColumnIsADataError) {
  WindStore w;
  std::ofstream(w.store / "bad.map") << "@name bad\nx hasValue y\n@bind y weatherTs.nope\n";
  const auto r = trt_cli({"query", "--store", w.store.string(), "-e", "SELECT * WHERE { ?a ?b ?c }"});
  EXPECT_EQ(r.code, exit_data);
  EXPECT_NE(r.err.find("nope"), std::string::npos) << r.err;
}

// ---- inspect ---------------------------------------------------------------

TEST(CliInspect, DumpsTheIndexAndDetectsCorruption) {
  testing::TempDir dir;
  GenOptions o;
  o.rows = 20000;
  write_csv(dir / "d.csv", generate("shelburne-like", o));
  ASSERT_EQ(trt_cli({"import", "--store", (dir / "st").string(), "--series", "s", "--csv", (dir / "d.csv").string(),
                     "--precision", "ns", "--bsize", "16384"})
                .code,
            0);
  std::size_t blocks = 0;
  {
    auto store = Store::open(dir / "st");
    blocks = store->stats("s").blocks;
  }
  ASSERT_GT(blocks, 3U);
  const auto r = trt_cli({"inspect", "--store", (dir / "st").string(), "--series", "s"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("blocks " + std::to_string(blocks) + " rows 20000"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("block " + std::to_string(blocks - 1) + " start"), std::string::npos);
  EXPECT_NE(r.out.find("checksums ok (" + std::to_string(blocks) + " blocks)"), std::string::npos);

  EXPECT_EQ(trt_cli({"inspect", "--store", (dir / "st").string(), "--series", "zz"}).code, exit_data);

  // Flip one byte inside the first block body.
  {
    std::fstream f(dir / "st" / "s.trt", std::ios::in | std::ios::out | std::ios::binary);
    f.seekg(400);
    char c = 0;
    f.read(&c, 1);
    c = static_cast<char>(c ^ 0x5a);
    f.seekp(400);
    f.write(&c, 1);
  }
  const auto bad = trt_cli({"inspect", "--store", (dir / "st").string(), "--series", "s"});
  EXPECT_EQ(bad.code, exit_corruption) << bad.out << bad.err;
}

// ---- gen -------------------------------------------------------------------

TEST(CliGen, DeterministicPerSeed) {
  testing::TempDir dir;
  for (const auto& preset : generator_names()) {
    const auto a = dir / (preset + "-a.csv");
    const auto b = dir / (preset + "-b.csv");
    const auto c = dir / (preset + "-c.csv");
    ASSERT_EQ(trt_cli({"gen", "--preset", preset, "--rows", "500", "--seed", "9", "-o", a.string()}).code, 0);
    ASSERT_EQ(trt_cli({"gen", "--preset", preset, "--rows", "500", "--seed", "9", "-o", b.string()}).code, 0);
    ASSERT_EQ(trt_cli({"gen", "--preset", preset, "--rows", "500", "--seed", "10", "-o", c.string()}).code, 0);
    EXPECT_EQ(slurp(a), slurp(b));
    EXPECT_NE(slurp(a), slurp(c));
    const auto text = slurp(a);
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 501);
  }
  EXPECT_EQ(trt_cli({"gen", "--preset", "nope", "-o", (dir / "x").string()}).code, exit_usage);
  const auto out = trt_cli({"gen", "--preset", "taxi-like", "--rows", "3", "--columns", "2", "-o", "-"});
  ASSERT_EQ(out.code, 0);
  EXPECT_EQ(std::count(out.out.begin(), out.out.end(), '\n'), 4);
}

// ---- bench -----------------------------------------------------------------

std::string field(const std::string& text, const std::string& key) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind(key + " ", 0) == 0) return line.substr(key.size() + 1);
  }
  return {};
}

TEST(CliBench, SweepVerifyAndSizes) {
  testing::TempDir dir;
  GenOptions o;
  o.rows = 30000;
  const auto data = generate("shelburne-like", o);
  BenchOptions opts;
  opts.store = dir / "bench";
  opts.verify = true;
  opts.bsize_sweep = true;
  opts.readers = 2;
  opts.repetitions = 2;
  const auto rep = run_bench(data, opts);
  EXPECT_EQ(rep.rows, 30000U);
  EXPECT_EQ(rep.rows_accepted, 30000U);
  EXPECT_EQ(rep.mismatches, 0U);
  EXPECT_EQ(rep.ranges, 100U);
  ASSERT_EQ(rep.sweep.size(), 7U);
  for (std::size_t i = 0; i < 7; ++i) {
    EXPECT_EQ(rep.sweep[i].exponent, static_cast<int>(i) + 2);
    EXPECT_EQ(rep.sweep[i].b_size, 4096U << (i + 2));
    struct stat st {};
    ASSERT_EQ(::stat((opts.store / ("sweep-b" + std::to_string(rep.sweep[i].b_size)) / "bench.trt").c_str(), &st), 0);
    EXPECT_EQ(rep.sweep[i].db_bytes, static_cast<std::uint64_t>(st.st_size));
  }
  struct stat st {};
  ASSERT_EQ(::stat((opts.store / "bench.trt").c_str(), &st), 0);
  EXPECT_EQ(rep.db_bytes, static_cast<std::uint64_t>(st.st_size));
  ASSERT_EQ(rep.codec_sizes.size(), 6U);
  for (const auto& c : rep.codec_sizes) EXPECT_GT(c.bytes, 0U);
}

TEST(CliBench, TextAndJsonAgree) {
  const auto text = trt_cli({"bench", "--preset", "srbench-like", "--rows", "3000", "--reps", "1"});
  const auto json = trt_cli({"bench", "--preset", "srbench-like", "--rows", "3000", "--reps", "1", "--json"});
  ASSERT_EQ(text.code, 0) << text.err;
  ASSERT_EQ(json.code, 0) << json.err;
  const auto j = nlohmann::json::parse(json.out);
  // Deterministic fields are identical across runs.
  for (const auto* key : {"rows", "raw_bytes", "rows_accepted", "rows_rejected_late", "ranges", "db_bytes", "blocks"}) {
    EXPECT_EQ(field(text.out, key), j[key].dump()) << key;
  }
  EXPECT_EQ(field(text.out, "dataset"), "srbench-like");
  EXPECT_EQ(j["dataset"], "srbench-like");
  // Within one run the two renderings come from the same report.
  GenOptions o;
  o.rows = 2000;
  auto rep = run_bench(generate("taxi-like", o), BenchOptions{});
  rep.dataset = "taxi-like";
  const auto t = to_text(rep);
  const auto k = nlohmann::json::parse(to_json(rep));
  for (const auto* key : {"ingest_seconds", "ingest_rows_per_s", "full_scan_ms", "range_query_ms",
                          "aggregate_query_ms", "db_bytes"}) {
    EXPECT_DOUBLE_EQ(std::stod(field(t, key)), k[key].get<double>()) << key;
  }
  for (const auto& c : k["codec_sizes"]) {
    const auto line = "codec " + c["kind"].get<std::string>() + " " + c["codec"].get<std::string>() + " bytes " +
                      std::to_string(c["bytes"].get<std::uint64_t>());
    EXPECT_NE(t.find(line), std::string::npos) << line;
  }
}

TEST(CliBench, EmptyDatasetReportsZeros) {
  const auto r = trt_cli({"bench", "--rows", "0", "--verify", "--bsize-sweep", "--json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["rows"], 0);
  EXPECT_EQ(j["rows_accepted"], 0);
  EXPECT_EQ(j["ranges"], 0);
  EXPECT_EQ(j["range_query_ms"], 0.0);
  EXPECT_EQ(j["blocks"], 0);
  EXPECT_EQ(j["mismatches"], 0);
  EXPECT_EQ(j["sweep"].size(), 7U);
  for (const auto& c : j["codec_sizes"]) EXPECT_EQ(c["bits_per_value"], 0.0);
}

TEST(CliBench, CsvDatasetWithVerify) {
  testing::TempDir dir;
  GenOptions o;
  o.rows = 5000;
  write_csv(dir / "d.csv", generate("taxi-like", o));
  const auto r = trt_cli({"bench", "--csv", (dir / "d.csv").string(), "--precision", "s", "--verify", "--ts-codec",
                          "leb", "--val-codec", "fpc"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(field(r.out, "dataset"), "d.csv");
  EXPECT_EQ(field(r.out, "rows"), "5000");
  EXPECT_EQ(field(r.out, "mismatches"), "0");
}

}  // namespace
}  // namespace trt::cli
