#include "trtcli/app.hpp"

#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "trt/error.hpp"
#include "trt/oracle/naive_store.hpp"
#include "trtcli/bench.hpp"
#include "trtcli/commands.hpp"

namespace trt::cli {
namespace {

namespace fs = std::filesystem;

// Flags shared by commands that create series.
struct SchemaFlags {
  std::string precision = "ms";
  std::string ts_codec = "dod";
  std::string val_codec = "gorilla";
  std::uint32_t q = IngestConfig{}.q;
  double a = IngestConfig{}.a;
  std::uint32_t b_size = IngestConfig{}.b_size;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--precision", precision, "Timestamp precision")
        ->check(CLI::IsMember({"s", "ms", "ns"}))
        ->capture_default_str();
    cmd.add_option("--ts-codec", ts_codec, "Timestamp codec")
        ->check(CLI::IsMember({"dod", "leb", "rice"}))
        ->capture_default_str();
    cmd.add_option("--val-codec", val_codec, "Value codec")
        ->check(CLI::IsMember({"gorilla", "fpc", "emdod"}))
        ->capture_default_str();
    cmd.add_option("--q", q, "Reorder buffer capacity in rows")->capture_default_str();
    cmd.add_option("--a", a, "Fraction of the buffer flushed on expiry")->capture_default_str();
    cmd.add_option("--bsize", b_size, "Block size in bytes")->capture_default_str();
  }

  [[nodiscard]] IngestConfig ingest() const {
    IngestConfig c{q, a, b_size};
    try {
      c.validate();
    } catch (const Error& e) {
      throw CLI::ValidationError("ingest options", e.what());
    }
    return c;
  }
};

struct GenFlags {
  std::string preset = "shelburne-like";
  GenOptions options;
  std::string precision;
  std::int64_t period = 0;
  std::int64_t jitter = 0;
  double duplicate_rate = -1;
  std::size_t columns = 0;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--preset", preset, "Generator preset")->check(CLI::IsMember(generator_names()))->capture_default_str();
    cmd.add_option("--rows", options.rows, "Rows to generate")->capture_default_str();
    cmd.add_option("--seed", options.seed, "Generator seed")->capture_default_str();
    cmd.add_option("--gen-precision", precision, "Override the preset precision")
        ->check(CLI::IsMember({"s", "ms", "ns"}));
    cmd.add_option("--period", period, "Override the period, in ticks")->check(CLI::PositiveNumber);
    cmd.add_option("--jitter", jitter, "Override the jitter, in ticks")->check(CLI::NonNegativeNumber);
    cmd.add_option("--dup-rate", duplicate_rate, "Override the duplicate timestamp rate")->check(CLI::Range(0.0, 1.0));
    cmd.add_option("--columns", columns, "Override the value column count")->check(CLI::PositiveNumber);
  }

  [[nodiscard]] GenOptions resolve(const CLI::App& cmd) const {
    auto o = options;
    if (!precision.empty()) o.precision = parse_precision(precision);
    if (cmd.count("--period")) o.period = period;
    if (cmd.count("--jitter")) o.jitter = jitter;
    if (cmd.count("--dup-rate")) o.duplicate_rate = duplicate_rate;
    if (cmd.count("--columns")) o.columns = columns;
    return o;
  }
};

int exit_code_for(const Error& e) { return e.code() == Errc::corruption ? exit_corruption : exit_data; }

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Compressed time-series store with a graph query layer"};
  app.name(args.empty() ? "trt" : fs::path(args[0]).filename().string());
  app.require_subcommand(1);
  std::function<int()> action;

  // import
  ImportOptions import;
  SchemaFlags import_schema;
  auto* cmd_imp = app.add_subcommand("import", "Ingest a CSV file into a new series");
  cmd_imp->add_option("--store", import.store, "Store directory")->required();
  cmd_imp->add_option("--series", import.series, "Series name")->required();
  cmd_imp->add_option("--csv", import.csv, "CSV file with a header row")->required()->check(CLI::ExistingFile);
  cmd_imp->add_option("--ts-column", import.ts_column, "Timestamp column (default: first)");
  cmd_imp->add_option("--types", import.types, "Column type overrides, col:type,...");
  cmd_imp->add_flag("--strict", import.strict, "Abort on the first unparseable row");
  import_schema.add_to(*cmd_imp);
  cmd_imp->callback([&] {
    action = [&] {
      import.precision = parse_precision(import_schema.precision);
      import.ts_codec = parse_ts_codec(import_schema.ts_codec);
      import.val_codec = parse_val_codec(import_schema.val_codec);
      import.ingest = import_schema.ingest();
      const auto s = cmd_import(import, err);
      out << "accepted " << s.accepted << " rejected_late " << s.rejected_late << " skipped " << s.skipped
          << " seconds " << s.seconds << '\n';
      return exit_ok;
    };
  });

  // query
  QueryOptions query;
  std::string query_file;
  std::string format = "csv";
  bool no_pushdown = false;
  auto* cmd_q = app.add_subcommand("query", "Run a query and print the result table");
  cmd_q->add_option("--store", query.store, "Store directory")->required();
  auto* text_opt = cmd_q->add_option("--query,-e", query.text, "Query text");
  auto* file_opt = cmd_q->add_option("--file,-f", query_file, "File holding the query")->check(CLI::ExistingFile);
  text_opt->excludes(file_opt);
  cmd_q->add_option("--mapping,-m", query.mappings, "Mapping file; the store's *.map files are always loaded")
      ->check(CLI::ExistingFile);
  cmd_q->add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "tsv"}))->capture_default_str();
  cmd_q->add_flag("--no-pushdown", no_pushdown, "Scan whole series instead of filter ranges");
  cmd_q->add_flag("--explain", query.explain, "Print the operator tree instead of running it");
  cmd_q->callback([&] {
    if (!*text_opt && !*file_opt) throw CLI::RequiredError("--query or --file");
    action = [&] {
      if (!query_file.empty()) {
        std::ifstream in(query_file, std::ios::binary);
        std::ostringstream s;
        s << in.rdbuf();
        query.text = s.str();
      }
      query.format = parse_output_format(format);
      query.pushdown = !no_pushdown;
      cmd_query(query, out, err);
      return exit_ok;
    };
  });

  // inspect
  fs::path inspect_store;
  std::string inspect_series;
  auto* cmd_ins = app.add_subcommand("inspect", "Dump a series' schema and block index and verify checksums");
  cmd_ins->add_option("--store", inspect_store, "Store directory")->required();
  cmd_ins->add_option("--series", inspect_series, "Series name")->required();
  cmd_ins->callback([&] {
    action = [&] {
      cmd_inspect(inspect_store, inspect_series, out);
      return exit_ok;
    };
  });

  // gen
  GenFlags gen;
  std::string gen_out;
  auto* cmd_gen_app = app.add_subcommand("gen", "Write a synthetic dataset as CSV");
  gen.add_to(*cmd_gen_app);
  cmd_gen_app->add_option("--out,-o", gen_out, "Output CSV file, - for standard output")->required();
  cmd_gen_app->callback([&] {
    action = [&] {
      const auto options = gen.resolve(*cmd_gen_app);
      if (gen_out == "-") {
        write_dataset_csv(generate(gen.preset, options), out);
      } else {
        cmd_gen(gen.preset, options, gen_out);
      }
      return exit_ok;
    };
  });

  // bench
  BenchOptions bench;
  GenFlags bench_gen;
  SchemaFlags bench_schema;
  fs::path bench_csv;
  std::string bench_ts_column;
  bool json = false;
  auto* cmd_b = app.add_subcommand("bench", "Measure compression, ingestion and query speed");
  cmd_b->add_option("--store", bench.store, "Store directory (default: a temporary directory)");
  bench_gen.add_to(*cmd_b);
  auto* csv_opt = cmd_b->add_option("--csv", bench_csv, "Benchmark a CSV file instead of a generator")
                      ->check(CLI::ExistingFile);
  cmd_b->add_option("--ts-column", bench_ts_column, "Timestamp column of --csv (default: first)")->needs(csv_opt);
  bench_schema.add_to(*cmd_b);
  cmd_b->add_option("--ranges", bench.ranges, "Random range queries")->capture_default_str();
  cmd_b->add_option("--reps", bench.repetitions, "Full scan repetitions")->check(CLI::PositiveNumber)->capture_default_str();
  cmd_b->add_option("--range-seed", bench.seed, "Seed of the range queries")->capture_default_str();
  cmd_b->add_option("--readers", bench.readers, "Reader threads querying during ingestion")->capture_default_str();
  cmd_b->add_flag("--verify", bench.verify, "Check every answer against the naive store");
  cmd_b->add_flag("--bsize-sweep", bench.bsize_sweep, "Repeat ingestion for b_size = 4096 * 2^x, x = 2..8");
  cmd_b->add_flag("--json", json, "Print the report as JSON");
  cmd_b->callback([&] {
    action = [&] {
      bench.ts_codec = parse_ts_codec(bench_schema.ts_codec);
      bench.val_codec = parse_val_codec(bench_schema.val_codec);
      bench.ingest = bench_schema.ingest();
      Dataset data;
      std::string name;
      if (!bench_csv.empty()) {
        ImportOptions o;
        o.csv = bench_csv;
        o.series = "bench";
        o.ts_column = bench_ts_column;
        o.precision = parse_precision(bench_schema.precision);
        data = load_csv(o, err).data;
        name = bench_csv.filename().string();
      } else {
        data = generate(bench_gen.preset, bench_gen.resolve(*cmd_b));
        name = bench_gen.preset;
      }
      auto report = run_bench(data, bench);
      report.dataset = name;
      out << (json ? to_json(report) : to_text(report));
      if (bench.verify && report.mismatches > 0) {
        err << "verify: " << report.mismatches << " answers differ from the naive store\n";
        return exit_corruption;
      }
      return exit_ok;
    };
  });

  try {
    std::vector<std::string> rest(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
    std::reverse(rest.begin(), rest.end());
    app.parse(rest);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_ok : exit_usage;
  }
  try {
    return action();
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_ok : exit_usage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_data;
  }
}

}  // namespace trt::cli
