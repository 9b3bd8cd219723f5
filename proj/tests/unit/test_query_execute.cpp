#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <thread>

#include "support/query_fixtures.hpp"
#include "support/temp_dir.hpp"
#include "trt/analytics.hpp"
#include "trt/error.hpp"
#include "trt/query/execute.hpp"
#include "trt/query/parser.hpp"
#include "trt/timefmt.hpp"

namespace trt::query {
namespace {

using testing::QueryWorld;
using CellRow = std::vector<Cell>;

ResultTable run_store(QueryWorld& w, const OpPtr& plan, const ExecOptions& options = {}, ExecStats* stats = nullptr) {
  auto source = w.store_source();
  return execute(*plan, source, w.mappings, options, stats);
}

ResultTable run_naive(const QueryWorld& w, const OpPtr& plan, const ExecOptions& options = {}) {
  auto source = w.naive_source();
  return execute(*plan, source, w.mappings, options);
}

Errc error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::end_of_stream;
}

std::string dump(const ResultTable& t) {
  std::string out;
  for (const auto& c : t.columns) out += c + "\t";
  out += "\n";
  for (const auto& r : t.rows) {
    for (const auto& c : r) out += to_text(c) + "\t";
    out += "\n";
  }
  return out;
}

bool time_ordered(const ResultTable& t) {
  for (std::size_t i = 1; i < t.times.size(); ++i) {
    if (compare_time(t.times[i - 1], t.times[i]) > 0) return false;
  }
  return t.times.size() == t.rows.size();
}

// ---- poor weather and hourly wind -------------------------------------------

TEST(Execute, PoorWeatherPlanMatchesHandComputedStations) {
  testing::TempDir dir;
  auto w = testing::make_world(dir.path(), testing::weather_series(), {testing::kWeatherMapping});
  const auto want = testing::poor_weather_expected();
  for (const auto& plan : {testing::poor_weather_plan(), parse_query(testing::kPoorWeatherQuery)}) {
    for (const bool naive : {false, true}) {
      const auto got = naive ? run_naive(w, plan) : run_store(w, plan);
      ASSERT_EQ(got.columns, std::vector<std::string>{"station"});
      std::vector<std::string> stations;
      for (const auto& r : got.rows) stations.push_back(std::get<std::string>(r[0]));
      EXPECT_EQ(stations, want) << dump(got);
      EXPECT_TRUE(time_ordered(got));
    }
  }
}

TEST(Execute, PoorWeatherBranchesEachIssueOneRangedScan) {
  testing::TempDir dir;
  auto w = testing::make_world(dir.path(), testing::weather_series(), {testing::kWeatherMapping});
  ExecStats stats;
  (void)run_store(w, testing::poor_weather_plan(), {}, &stats);
  ASSERT_EQ(stats.scans.size(), 3U);
  for (const auto& s : stats.scans) {
    EXPECT_EQ(s.start, testing::at(1) + 1) << s.series;
    EXPECT_EQ(s.end, testing::at(7) - 1) << s.series;
  }
}

// Hourly averages by folding rows into hour buckets.
std::map<std::int64_t, double> hourly_oracle(const std::vector<Row>& rows, std::int64_t lo, std::int64_t hi) {
  std::map<std::int64_t, std::pair<double, int>> acc;
  for (const auto& r : rows) {
    if (r.timestamp <= lo || r.timestamp >= hi) continue;
    auto& a = acc[r.timestamp - r.timestamp % 3600];
    a.first += std::get<double>(r.values[0]);
    ++a.second;
  }
  std::map<std::int64_t, double> out;
  for (const auto& [k, a] : acc) out[k] = a.first / a.second;
  return out;
}

TEST(Execute, HourlyWindAverageEqualsBucketFold) {
  testing::TempDir dir;
  const auto data = testing::wind_series(4);
  auto w = testing::make_world(dir.path(), {data}, {testing::kWindMapping});

  const auto one = run_store(w, parse_query(testing::kHourlyWindQuery));
  const auto want_one = hourly_oracle(data.rows, testing::kApril1, testing::kApril1 + 3600);
  ASSERT_EQ(one.columns, std::vector<std::string>{"val"});
  ASSERT_EQ(one.rows.size(), 1U);
  EXPECT_DOUBLE_EQ(std::get<double>(one.rows[0][0]), want_one.begin()->second);

  const auto all = run_store(w, parse_query(
      "SELECT ?time (AVG(?wsVal) AS ?val) WHERE { ?sensor isA windSensor; has ?obs. "
      "?obs hasValue ?wsVal; hasTime ?time. } GROUP BY hours(?time)"));
  const auto want = hourly_oracle(data.rows, min_time, max_time);
  ASSERT_EQ(all.rows.size(), want.size());
  std::size_t i = 0;
  for (const auto& [bucket, avg] : want) {
    EXPECT_EQ(std::get<Time>(all.rows[i][0]).ticks, bucket);
    EXPECT_NEAR(std::get<double>(all.rows[i][1]), avg, 1e-12 * std::abs(avg));
    ++i;
  }
  EXPECT_TRUE(time_ordered(all));
}

TEST(Execute, SmaGroupingFollowsTheAnalyticsModule) {
  testing::TempDir dir;
  const auto data = testing::wind_series(2);
  auto w = testing::make_world(dir.path(), {data}, {testing::kWindMapping});
  const auto got = run_store(w, parse_query(
      "SELECT ?t (AVG(?v) AS ?m) WHERE { ?o hasValue ?v ; hasTime ?t } GROUP BY sma(?t, 10m)"));
  std::vector<std::int64_t> times;
  std::vector<double> values;
  for (const auto& r : data.rows) {
    times.push_back(r.timestamp);
    values.push_back(std::get<double>(r.values[0]));
  }
  const auto want = trt::sma(times, values, 600);
  ASSERT_EQ(got.rows.size(), want.size());
  for (std::size_t i = 0; i < want.size(); ++i) {
    EXPECT_EQ(std::get<Time>(got.rows[i][0]).ticks, want[i].time);
    EXPECT_EQ(std::get<double>(got.rows[i][1]), want[i].value);
  }
  EXPECT_EQ(error_of([&] {
              (void)run_store(w, parse_query("SELECT ?t (MAX(?v) AS ?m) WHERE { ?o hasValue ?v ; hasTime ?t } "
                                             "GROUP BY sma(?t, 10m)"));
            }),
            Errc::unsupported_feature);
}

// ---- pushdown and the aggregate fast path -----------------------------------

TEST(Execute, PushdownChangesDecodeCountsNotResults) {
  testing::TempDir dir;
  const auto data = testing::wind_series(48, 11);
  auto w = testing::make_world(dir.path(), {data}, {testing::kWindMapping});
  ASSERT_GT(w.store->stats("weatherTs").blocks, 10U);
  std::mt19937_64 rng(5);
  for (int round = 0; round < 30; ++round) {
    const auto a = testing::kApril1 + static_cast<std::int64_t>(rng() % (48 * 3600));
    const auto b = a + static_cast<std::int64_t>(rng() % (6 * 3600));
    const auto plan = op_project(
        op_filter(op_match_scan({{Var{"o"}, Term::iri("hasValue"), Var{"v"}}, {Var{"o"}, Term::iri("hasTime"), Var{"t"}}}),
                  conjunction({binary(">=", var("t"), lit(Time{a * 1'000'000'000, TimestampPrecision::nanoseconds})),
                               binary("<", var("t"), lit(format_rfc3339(b, TimestampPrecision::seconds))),
                               binary(">", var("v"), lit(10.0))})),
        std::vector<std::string>{"t", "v"});

    const auto before = w.store->stats("weatherTs").blocks_decoded;
    ExecStats pushed_stats;
    const auto pushed = run_store(w, plan, {}, &pushed_stats);
    const auto mid = w.store->stats("weatherTs").blocks_decoded;
    ExecStats full_stats;
    const auto full = run_store(w, plan, ExecOptions{false, true}, &full_stats);
    const auto after = w.store->stats("weatherTs").blocks_decoded;

    EXPECT_TRUE(same_rows_ordered(pushed, full)) << "round " << round;
    EXPECT_TRUE(same_rows_ordered(pushed, run_naive(w, plan)));
    ASSERT_EQ(pushed_stats.scans.size(), 1U);
    EXPECT_EQ(pushed_stats.scans[0].start, a);
    EXPECT_EQ(pushed_stats.scans[0].end, b - 1);
    ASSERT_EQ(full_stats.scans.size(), 1U);
    EXPECT_EQ(full_stats.scans[0].start, min_time);
    EXPECT_LT(mid - before, after - mid);
  }
}

TEST(Execute, PushdownRespectsPrecisionTruncation) {
  testing::TempDir dir;
  const auto data = testing::wind_series(2, 3);
  auto w = testing::make_world(dir.path(), {data}, {testing::kWindMapping});
  const auto leaf = op_match_scan({{Var{"o"}, Term::iri("hasTime"), Var{"t"}}});
  // Sub-second literals against a seconds column, integer ticks and flipped operands.
  const std::vector<ExprPtr> predicates = {
      binary(">", var("t"), time_lit("2003-04-01T00:30:00.7Z")),
      binary("<=", var("t"), time_lit("2003-04-01T00:30:00.7Z")),
      binary("<", var("t"), time_lit("2003-04-01T00:30:00.7Z")),
      binary("=", var("t"), lit(std::int64_t{data.rows[5].timestamp})),
      binary("<", lit(std::string("2003-04-01T01:00:00")), var("t")),
      binary(">=", lit(std::int64_t{data.rows[9].timestamp}), var("t")),
  };
  for (const auto& p : predicates) {
    const auto plan = op_filter(leaf, p);
    ExecStats stats;
    const auto pushed = run_store(w, plan, {}, &stats);
    const auto full = run_store(w, plan, ExecOptions{false, true});
    EXPECT_TRUE(same_rows_ordered(pushed, full)) << to_string(*p);
    EXPECT_FALSE(pushed.rows.empty()) << to_string(*p);
  }
}

TEST(Execute, AggregateFastPathMatchesScanPath) {
  testing::TempDir dir;
  const auto data = testing::wind_series(24, 17);
  auto w = testing::make_world(dir.path(), {data}, {testing::kWindMapping});
  std::mt19937_64 rng(99);
  const BasicGraphPattern bgp = {{Var{"o"}, Term::iri("hasValue"), Var{"v"}}, {Var{"o"}, Term::iri("hasTime"), Var{"t"}}};
  std::size_t fast_hits = 0;
  for (int round = 0; round < 100; ++round) {
    const auto a = testing::kApril1 - 600 + static_cast<std::int64_t>(rng() % (25 * 3600));
    const auto b = a + static_cast<std::int64_t>(rng() % (4 * 3600));
    const auto plan = op_aggregate(
        op_filter(op_match_scan(bgp), conjunction({binary(">=", var("t"), lit(std::int64_t{a})),
                                                   binary("<=", var("t"), lit(std::int64_t{b}))})),
        {},
        {AggSpec{AggOp::count, var("v"), "n"}, AggSpec{AggOp::sum, var("v"), "s"}, AggSpec{AggOp::avg, var("v"), "m"},
         AggSpec{AggOp::min, var("v"), "lo"}, AggSpec{AggOp::max, var("v"), "hi"}, AggSpec{AggOp::count, nullptr, "all"}});
    ExecStats stats;
    const auto fast = run_store(w, plan, {}, &stats);
    const auto slow = run_store(w, plan, ExecOptions{true, false});
    const auto oracle = run_naive(w, plan);
    fast_hits += stats.fast_aggregates;
    EXPECT_EQ(stats.scans.size(), 0U);
    ASSERT_EQ(fast.columns, slow.columns);
    ASSERT_EQ(fast.rows.size(), slow.rows.size()) << "round " << round;
    EXPECT_TRUE(same_rows_ordered(slow, oracle));
    if (fast.rows.empty()) continue;
    const auto& f = fast.rows[0];
    const auto& s = slow.rows[0];
    EXPECT_TRUE(same_cell(f[0], s[0]));
    EXPECT_TRUE(same_cell(f[3], s[3]));
    EXPECT_TRUE(same_cell(f[4], s[4]));
    EXPECT_TRUE(same_cell(f[5], s[5]));
    for (const std::size_t c : {1U, 2U}) {
      const double x = std::get<double>(f[c]);
      const double y = std::get<double>(s[c]);
      EXPECT_LE(std::abs(x - y), 1e-9 * std::abs(y)) << "round " << round;
    }
  }
  EXPECT_EQ(fast_hits, 100U);
}

TEST(Execute, FastPathDeclinesWhenFiltersAreNotTimeBounds) {
  testing::TempDir dir;
  auto w = testing::make_world(dir.path(), {testing::wind_series(3)}, {testing::kWindMapping});
  const BasicGraphPattern bgp = {{Var{"o"}, Term::iri("hasValue"), Var{"v"}}, {Var{"o"}, Term::iri("hasTime"), Var{"t"}}};
  const auto plan = op_aggregate(op_filter(op_match_scan(bgp), binary(">", var("v"), lit(20.0))), {},
                                 {AggSpec{AggOp::max, var("v"), "hi"}});
  ExecStats stats;
  const auto got = run_store(w, plan, {}, &stats);
  EXPECT_EQ(stats.fast_aggregates, 0U);
  EXPECT_TRUE(same_rows_ordered(got, run_naive(w, plan)));
}

TEST(Execute, AggregateOverEmptyInputIsEmpty) {
  testing::TempDir dir;
  auto w = testing::make_world(dir.path(), {testing::wind_series(1)}, {testing::kWindMapping});
  const BasicGraphPattern bgp = {{Var{"o"}, Term::iri("hasValue"), Var{"v"}}, {Var{"o"}, Term::iri("hasTime"), Var{"t"}}};
  const auto plan = op_aggregate(op_filter(op_match_scan(bgp), binary(">", var("t"), lit(std::int64_t{max_time - 1}))),
                                 {}, {AggSpec{AggOp::count, var("v"), "n"}});
  for (const bool fast : {true, false}) {
    const auto got = run_store(w, plan, ExecOptions{true, fast});
    EXPECT_EQ(got.columns, std::vector<std::string>{"n"});
    EXPECT_TRUE(got.rows.empty());
  }
}

// ---- leaf materialization ---------------------------------------------------

const char* const kToyMapping = R"(@name toy
sensA a Sensor
sensB a Sensor
sensA hasObs obsA
obsA hasX xA
obsA hasY yA
obsA hasK kA
obsA hasTime tA
sensB hasObs obsB
obsB hasX xB
obsB hasZ zB
obsB hasTime tB
@bind xA aTs.x
@bind yA aTs.y
@bind kA aTs.k
@bind tA aTs.@time
@bind xB bTs.x
@bind zB bTs.z
@bind tB bTs.@time
)";

// Strictly increasing timestamps so every scan order is fully determined.
std::vector<testing::SeriesData> toy_series(std::uint64_t seed, std::size_t na = 40, std::size_t nb = 30) {
  std::mt19937_64 rng(seed);
  testing::SeriesData a;
  a.schema.name = "aTs";
  a.schema.precision = TimestampPrecision::seconds;
  a.schema.columns = {{"x", ColumnType::int64}, {"y", ColumnType::float64}, {"k", ColumnType::string}};
  std::int64_t t = testing::kApril1;
  for (std::size_t i = 0; i < na; ++i) {
    t += 1 + static_cast<std::int64_t>(rng() % 3);
    a.rows.push_back(Row{t,
                         {Value{static_cast<std::int64_t>(rng() % 5)}, Value{static_cast<double>(rng() % 100) / 10},
                          Value{std::string(1, static_cast<char>('a' + rng() % 3))}}});
  }
  testing::SeriesData b;
  b.schema.name = "bTs";
  b.schema.precision = TimestampPrecision::milliseconds;
  b.schema.columns = {{"x", ColumnType::int64}, {"z", ColumnType::float64}};
  t = testing::kApril1 * 1000;
  for (std::size_t i = 0; i < nb; ++i) {
    t += 1000 * (1 + static_cast<std::int64_t>(rng() % 3)) + (rng() % 4 == 0 ? 250 : 0);
    b.rows.push_back(Row{t, {Value{static_cast<std::int64_t>(rng() % 5)}, Value{static_cast<double>(rng() % 10) / 10}}});
  }
  return {a, b};
}

OpPtr leaf_a() {
  return op_match_scan({{Var{"s"}, Term::iri("hasObs"), Var{"o"}},
                        {Var{"o"}, Term::iri("hasX"), Var{"x"}},
                        {Var{"o"}, Term::iri("hasY"), Var{"y"}},
                        {Var{"o"}, Term::iri("hasK"), Var{"k"}},
                        {Var{"o"}, Term::iri("hasTime"), Var{"t"}}});
}

OpPtr leaf_b() {
  return op_match_scan({{Var{"s"}, Term::iri("hasObs"), Var{"o"}},
                        {Var{"o"}, Term::iri("hasX"), Var{"x"}},
                        {Var{"o"}, Term::iri("hasZ"), Var{"z"}},
                        {Var{"o"}, Term::iri("hasTime"), Var{"t"}}});
}

// Matches both series.
OpPtr leaf_any() {
  return op_match_scan({{Var{"s"}, Term::iri("hasObs"), Var{"o"}},
                        {Var{"o"}, Term::iri("hasX"), Var{"x"}},
                        {Var{"o"}, Term::iri("hasTime"), Var{"t"}}});
}

// Binds no series.
OpPtr leaf_sensors() { return op_match_scan({{Var{"s"}, Term::iri(std::string(rdf_type)), Term::iri("Sensor")}}); }

TEST(Execute, LeafTablesCarryBoundValuesTimesAndNodeText) {
  testing::TempDir dir;
  const auto data = toy_series(1);
  auto w = testing::make_world(dir.path(), data, {kToyMapping});
  const auto a = run_store(w, leaf_a());
  EXPECT_EQ(a.columns, (std::vector<std::string>{"s", "o", "x", "y", "k", "t"}));
  ASSERT_EQ(a.rows.size(), data[0].rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    const auto& src = data[0].rows[i];
    EXPECT_EQ(a.rows[i][0], Cell{std::string("sensA")});
    EXPECT_EQ(a.rows[i][1], Cell{std::string("obsA")});
    EXPECT_EQ(a.rows[i][2], to_cell(src.values[0]));
    EXPECT_EQ(a.rows[i][4], to_cell(src.values[2]));
    EXPECT_EQ(a.rows[i][5], (Cell{Time{src.timestamp, TimestampPrecision::seconds}}));
  }

  // One row per match when no series is bound.
  const auto sensors = run_store(w, leaf_sensors());
  ASSERT_EQ(sensors.rows.size(), 2U);
  EXPECT_EQ(sensors.rows[0][0], Cell{std::string("sensA")});

  // Two matches over two series merge in time order.
  const auto any = run_store(w, leaf_any());
  EXPECT_EQ(any.rows.size(), data[0].rows.size() + data[1].rows.size());
  EXPECT_TRUE(time_ordered(any));
}

TEST(Execute, VariablesOfTwoSeriesInOneMatchJoinOnTime) {
  testing::TempDir dir;
  auto data = toy_series(2);
  // Give bTs some timestamps equal to aTs ones.
  for (std::size_t i = 0; i < data[1].rows.size(); ++i) {
    data[1].rows[i].timestamp = data[0].rows[i].timestamp * 1000 + (i % 3 == 0 ? 0 : 1500);
  }
  auto w = testing::make_world(dir.path(), data,
                               {"@name pair\nwatch x ya\nwatch z zb\nya at ta\nzb at tb\n@bind ya aTs.y\n"
                                "@bind zb bTs.z\n@bind tb bTs.@time\n@bind ta aTs.@time\n"});
  const auto plan = op_match_scan({{Term::iri("watch"), Term::iri("x"), Var{"y"}},
                                   {Term::iri("watch"), Term::iri("z"), Var{"z"}},
                                   {Var{"y"}, Term::iri("at"), Var{"ta"}},
                                   {Var{"z"}, Term::iri("at"), Var{"tb"}}});
  ExecStats stats;
  const auto got = run_store(w, plan, {}, &stats);
  EXPECT_EQ(stats.scans.size(), 2U);
  // Times compare at the coarser precision, seconds here.
  std::size_t expected = 0;
  for (const auto& a : data[0].rows) {
    for (const auto& b : data[1].rows) expected += a.timestamp == b.timestamp / 1000 ? 1 : 0;
  }
  ASSERT_LT(expected, data[1].rows.size());
  EXPECT_EQ(got.rows.size(), expected);
  for (const auto& r : got.rows) {
    EXPECT_EQ(compare_time(std::get<Time>(r[2]), std::get<Time>(r[3])), 0);
  }
  EXPECT_TRUE(same_rows_ordered(got, run_naive(w, plan)));
}

// ---- operators against a naive relational oracle ----------------------------

ResultTable table_of(QueryWorld& w, const OpPtr& plan) { return run_store(w, plan); }

std::vector<std::size_t> positions(const ResultTable& t, const std::vector<std::string>& names) {
  std::vector<std::size_t> out;
  for (const auto& n : names) out.push_back(*t.column_index(n));
  return out;
}

enum class JoinKind { inner, semi, left };

ResultTable nested_loop_join(const ResultTable& l, const ResultTable& r, JoinKind kind) {
  std::vector<std::string> shared;
  std::vector<std::size_t> right_only;
  for (std::size_t j = 0; j < r.columns.size(); ++j) {
    if (l.column_index(r.columns[j])) {
      shared.push_back(r.columns[j]);
    } else {
      right_only.push_back(j);
    }
  }
  const auto lp = positions(l, shared);
  const auto rp = positions(r, shared);
  ResultTable out;
  out.columns = l.columns;
  if (kind != JoinKind::semi) {
    for (const auto j : right_only) out.columns.push_back(r.columns[j]);
  }
  for (const auto& lr : l.rows) {
    bool any = false;
    for (const auto& rr : r.rows) {
      bool ok = true;
      for (std::size_t k = 0; k < shared.size(); ++k) {
        ok = ok && !is_null(lr[lp[k]]) && same_cell(lr[lp[k]], rr[rp[k]]);
      }
      if (!ok) continue;
      any = true;
      if (kind == JoinKind::semi) break;
      auto row = lr;
      for (const auto j : right_only) row.push_back(rr[j]);
      out.rows.push_back(row);
    }
    if ((kind == JoinKind::semi && any) || (kind == JoinKind::left && !any)) {
      auto row = lr;
      row.resize(out.columns.size());
      out.rows.push_back(row);
    }
  }
  return out;
}

ResultTable minus_oracle(const ResultTable& l, const ResultTable& r) {
  std::vector<std::string> shared;
  for (const auto& c : r.columns) {
    if (l.column_index(c)) shared.push_back(c);
  }
  const auto lp = positions(l, shared);
  const auto rp = positions(r, shared);
  ResultTable out;
  out.columns = l.columns;
  for (const auto& lr : l.rows) {
    bool removed = false;
    for (const auto& rr : r.rows) {
      bool compatible = true;
      bool overlap = false;
      for (std::size_t k = 0; k < shared.size(); ++k) {
        if (is_null(lr[lp[k]]) || is_null(rr[rp[k]])) continue;
        overlap = true;
        compatible = compatible && same_cell(lr[lp[k]], rr[rp[k]]);
      }
      if (compatible && overlap) {
        removed = true;
        break;
      }
    }
    if (!removed) out.rows.push_back(lr);
  }
  return out;
}

TEST(Operators, JoinsAgainstNestedLoops) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    testing::TempDir dir;
    auto w = testing::make_world(dir.path(), toy_series(seed), {kToyMapping});
    const auto pa = op_project(leaf_a(), std::vector<std::string>{"t", "x", "y", "k"});
    const auto pb = op_project(leaf_b(), std::vector<std::string>{"t", "x", "z"});
    const auto pbx = op_project(leaf_b(), std::vector<std::string>{"x", "z"});
    const auto pbt = op_project(leaf_b(), std::vector<std::string>{"t", "z"});
    const auto ax = op_project(leaf_a(), std::vector<std::string>{"x", "k"});
    const std::vector<std::pair<OpPtr, OpPtr>> pairs = {{pa, pb}, {pa, pbx}, {pa, pbt}, {ax, pbt}, {ax, pbx}};
    for (const auto& [l, r] : pairs) {
      const auto lt = table_of(w, l);
      const auto rt = table_of(w, r);
      EXPECT_TRUE(same_rows_ordered(run_store(w, op_join(l, r)), nested_loop_join(lt, rt, JoinKind::inner)));
      const auto semi = run_store(w, op_semi_join(l, r));
      EXPECT_EQ(semi.columns, lt.columns);
      EXPECT_TRUE(same_rows_ordered(semi, nested_loop_join(lt, rt, JoinKind::semi)));
      EXPECT_TRUE(same_rows_ordered(run_store(w, op_left_join(l, r)), nested_loop_join(lt, rt, JoinKind::left)));
    }
  }
}

TEST(Operators, JoinConditionsAndAmbiguity) {
  testing::TempDir dir;
  auto w = testing::make_world(dir.path(), toy_series(3), {kToyMapping});
  const auto ax = op_project(leaf_a(), std::vector<std::string>{"x", "y"});
  const auto bz = op_project(leaf_b(), std::vector<std::string>{"x", "z"});
  const auto cond = binary(">", var("y"), var("z"));
  const auto lt = table_of(w, ax);
  const auto rt = table_of(w, bz);
  auto want = nested_loop_join(lt, rt, JoinKind::inner);
  std::erase_if(want.rows, [](const CellRow& r) { return !(std::get<double>(r[1]) > std::get<double>(r[2])); });
  EXPECT_TRUE(same_rows_ordered(run_store(w, op_join(ax, bz, cond)), want));

  // OPTIONAL with a condition keeps unmatched left rows padded with nulls.
  const auto left = run_store(w, op_left_join(ax, bz, cond));
  std::size_t padded = 0;
  for (const auto& r : left.rows) padded += is_null(r[2]) ? 1 : 0;
  EXPECT_GT(padded, 0U);

  EXPECT_EQ(error_of([&] { (void)run_store(w, op_join(ax, bz, nullptr, false)); }), Errc::ambiguous_column);
  const auto renamed = op_project(bz, std::vector<ProjectItem>{{"x", "bx"}, {"z", ""}});
  const auto cross = run_store(w, op_join(ax, renamed, binary("=", var("x"), var("bx")), false));
  EXPECT_EQ(cross.rows.size(), run_store(w, op_join(ax, bz)).rows.size());
}

TEST(Operators, SelfJoinOnTimeIsIdentity) {
  testing::TempDir dir;
  auto w = testing::make_world(dir.path(), toy_series(4), {kToyMapping});
  const auto p = op_project(leaf_a(), std::vector<std::string>{"t", "y"});
  const auto q = op_project(leaf_a(), std::vector<std::string>{"t", "k"});
  const auto joined = run_store(w, op_join(p, q));
  const auto base = table_of(w, leaf_a());
  ASSERT_EQ(joined.rows.size(), base.rows.size());
  EXPECT_TRUE(time_ordered(joined));
}

TEST(Operators, UnionMergesInTimeOrderAndPads) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    testing::TempDir dir;
    auto w = testing::make_world(dir.path(), toy_series(seed), {kToyMapping});
    const auto pa = op_project(leaf_a(), std::vector<std::string>{"t", "y"});
    const auto pb = op_project(leaf_b(), std::vector<std::string>{"z", "t"});
    const auto got = run_store(w, op_union({pa, pb}));
    EXPECT_EQ(got.columns, (std::vector<std::string>{"t", "y", "z"}));
    EXPECT_TRUE(time_ordered(got));

    // Concatenate then stable-sort by time.
    auto at = table_of(w, pa);
    auto bt = table_of(w, pb);
    std::vector<CellRow> rows;
    for (const auto& r : at.rows) rows.push_back({r[0], r[1], Null{}});
    for (const auto& r : bt.rows) rows.push_back({r[1], Null{}, r[0]});
    std::stable_sort(rows.begin(), rows.end(), [](const CellRow& x, const CellRow& y) {
      return compare_time(std::get<Time>(x[0]), std::get<Time>(y[0])) < 0;
    });
    ResultTable want{{"t", "y", "z"}, rows, {}};
    EXPECT_TRUE(same_rows_ordered(got, want));

    // union(x, empty) = x
    EXPECT_TRUE(same_rows_ordered(run_store(w, op_union({pa, op_filter(pa, lit(false))})), at));
  }
}

TEST(Operators, MinusDistinctSortLimitProjectExtend) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    testing::TempDir dir;
    auto w = testing::make_world(dir.path(), toy_series(seed), {kToyMapping});
    const auto ax = op_project(leaf_a(), std::vector<std::string>{"x", "k"});
    const auto bx = op_project(op_filter(leaf_b(), binary(">", var("z"), lit(0.5))), std::vector<std::string>{"x"});
    const auto at = table_of(w, ax);

    EXPECT_TRUE(same_rows_ordered(run_store(w, op_minus(ax, bx)), minus_oracle(at, table_of(w, bx))));

    // distinct keeps the first of each duplicate.
    ResultTable want{at.columns, {}, {}};
    for (const auto& r : at.rows) {
      const bool seen = std::any_of(want.rows.begin(), want.rows.end(), [&](const CellRow& q) {
        return std::equal(q.begin(), q.end(), r.begin(), same_cell);
      });
      if (!seen) want.rows.push_back(r);
    }
    EXPECT_TRUE(same_rows_ordered(run_store(w, op_distinct(ax)), want));
    const auto sorted_union = run_store(w, op_distinct(op_sort(op_union({ax, ax}), {SortKey{"k", 0, false}})));
    EXPECT_TRUE(same_rows_unordered(sorted_union, want));

    // sort: descending x then ascending k, stable.
    auto rows = at.rows;
    std::stable_sort(rows.begin(), rows.end(), [](const CellRow& a, const CellRow& b) {
      const auto xa = std::get<std::int64_t>(a[0]);
      const auto xb = std::get<std::int64_t>(b[0]);
      if (xa != xb) return xa > xb;
      return std::get<std::string>(a[1]) < std::get<std::string>(b[1]);
    });
    EXPECT_TRUE(same_rows_ordered(run_store(w, op_sort(ax, {SortKey{"", 0, true}, SortKey{"k", 0, false}})),
                                  ResultTable{at.columns, rows, {}}));
    EXPECT_EQ(error_of([&] { (void)run_store(w, op_sort(ax, {SortKey{"", 2, false}})); }), Errc::contract_violation);

    // limit
    const auto lim = run_store(w, op_limit(ax, 3, 4));
    ASSERT_EQ(lim.rows.size(), 4U);
    EXPECT_TRUE(std::equal(lim.rows.begin(), lim.rows.end(), at.rows.begin() + 3));
    EXPECT_TRUE(run_store(w, op_limit(ax, 5, 0)).rows.empty());
    EXPECT_EQ(run_store(w, op_limit(ax, 1000, std::nullopt)).rows.size(), 0U);
    EXPECT_EQ(run_store(w, op_limit(ax, 0, std::nullopt)).rows.size(), at.rows.size());

    // project to every column is the identity modulo order.
    const auto swapped = run_store(w, op_project(ax, std::vector<std::string>{"k", "x"}));
    for (std::size_t i = 0; i < at.rows.size(); ++i) {
      EXPECT_EQ(swapped.rows[i][0], at.rows[i][1]);
      EXPECT_EQ(swapped.rows[i][1], at.rows[i][0]);
    }
    EXPECT_EQ(error_of([&] { (void)run_store(w, op_project(ax, std::vector<std::string>{"nope"})); }),
              Errc::unbound_variable);

    // extend
    const auto ext = run_store(w, op_extend(ax, "x2", binary("*", var("x"), lit(std::int64_t{2}))));
    for (std::size_t i = 0; i < at.rows.size(); ++i) {
      EXPECT_EQ(ext.rows[i][2], Cell{std::get<std::int64_t>(at.rows[i][0]) * 2});
    }
    EXPECT_EQ(error_of([&] { (void)run_store(w, op_extend(ax, "x", lit(1.0))); }), Errc::contract_violation);
  }
}

TEST(Operators, FilterAgainstRowFold) {
  testing::TempDir dir;
  const auto data = testing::weather_series();
  auto w = testing::make_world(dir.path(), data, {testing::kWeatherMapping});
  const auto plan = op_filter(op_match_scan({{Var{"o"}, Term::iri("observes"), Term::iri("windSpeed")},
                                             {Var{"o"}, Term::iri("hasValue"), Var{"v"}}}),
                              binary(">", var("v"), lit(std::int64_t{100})));
  const auto got = run_store(w, plan);
  std::vector<Cell> want;
  for (const auto& r : data[2].rows) {
    if (std::get<double>(r.values[0]) > 100) want.push_back(to_cell(r.values[0]));
  }
  ASSERT_EQ(got.rows.size(), want.size());
  for (std::size_t i = 0; i < want.size(); ++i) EXPECT_EQ(got.rows[i][1], want[i]);

  const auto leaf = op_match_scan({{Var{"o"}, Term::iri("hasValue"), Var{"v"}}});
  EXPECT_TRUE(same_rows_ordered(run_store(w, op_filter(leaf, lit(true))), run_store(w, leaf)));
  EXPECT_EQ(error_of([&] { (void)run_store(w, op_filter(leaf, binary(">", var("nope"), lit(1.0)))); }),
            Errc::unbound_variable);
}

TEST(Operators, AggregateGroupsAgainstFold) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    testing::TempDir dir;
    auto w = testing::make_world(dir.path(), toy_series(seed), {kToyMapping});
    const auto plan = op_aggregate(leaf_a(), {GroupKey{GroupKey::Kind::column, "k", 0, ""}},
                                   {AggSpec{AggOp::count, nullptr, "n"}, AggSpec{AggOp::sum, var("x"), "sx"},
                                    AggSpec{AggOp::avg, var("y"), "ay"}, AggSpec{AggOp::min, var("y"), "lo"},
                                    AggSpec{AggOp::max, var("x"), "hi"}, AggSpec{AggOp::sample, var("x"), "any"},
                                    AggSpec{AggOp::group_concat, var("s"), "names"}});
    const auto got = run_store(w, plan);
    const auto base = table_of(w, leaf_a());
    struct Fold {
      std::int64_t n = 0;
      double sx = 0;
      double sy = 0;
      double lo = 1e300;
      std::int64_t hi = -1;
      std::int64_t first = -1;
      std::string names;
    };
    std::map<std::string, Fold> folds;
    for (const auto& r : base.rows) {
      auto& f = folds[std::get<std::string>(r[4])];
      const auto x = std::get<std::int64_t>(r[2]);
      const auto y = std::get<double>(r[3]);
      if (f.n == 0) f.first = x;
      f.names += (f.n ? " " : "") + std::get<std::string>(r[0]);
      ++f.n;
      f.sx += static_cast<double>(x);
      f.sy += y;
      f.lo = std::min(f.lo, y);
      f.hi = std::max(f.hi, x);
    }
    ASSERT_EQ(got.rows.size(), folds.size());
    std::size_t i = 0;
    for (const auto& [k, f] : folds) {
      const auto& r = got.rows[i++];
      EXPECT_EQ(r[0], Cell{k});
      EXPECT_EQ(r[1], Cell{f.n});
      EXPECT_EQ(r[2], Cell{f.sx});
      EXPECT_EQ(r[3], Cell{f.sy / static_cast<double>(f.n)});
      EXPECT_EQ(r[4], Cell{f.lo});
      EXPECT_EQ(r[5], Cell{f.hi});
      EXPECT_EQ(r[6], Cell{f.first});
      EXPECT_EQ(r[7], Cell{f.names});
    }
    EXPECT_EQ(error_of([&] {
                (void)run_store(w, op_aggregate(leaf_a(), {}, {AggSpec{AggOp::group_concat, var("x"), "g"}}));
              }),
              Errc::type_error);
    EXPECT_EQ(error_of([&] {
                (void)run_store(w, op_aggregate(leaf_a(), {}, {AggSpec{AggOp::sum, var("k"), "g"}}));
              }),
              Errc::type_error);
  }
}

TEST(Operators, NullsAreIgnoredByAggregatesExceptCountStar) {
  testing::TempDir dir;
  auto w = testing::make_world(dir.path(), toy_series(6), {kToyMapping});
  // Union pads y with nulls for rows of bTs.
  const auto u = op_union({op_project(leaf_a(), std::vector<std::string>{"t", "y"}),
                           op_project(leaf_b(), std::vector<std::string>{"t", "z"})});
  const auto got = run_store(w, op_aggregate(u, {}, {AggSpec{AggOp::count, nullptr, "all"},
                                                     AggSpec{AggOp::count, var("y"), "ys"},
                                                     AggSpec{AggOp::count, var("z"), "zs"}}));
  ASSERT_EQ(got.rows.size(), 1U);
  EXPECT_EQ(got.rows[0][0], Cell{std::int64_t{70}});
  EXPECT_EQ(got.rows[0][1], Cell{std::int64_t{40}});
  EXPECT_EQ(got.rows[0][2], Cell{std::int64_t{30}});
  // Comparison filters drop padded rows.
  EXPECT_EQ(run_store(w, op_filter(u, binary(">=", var("y"), lit(0.0)))).rows.size(), 40U);
}

TEST(Operators, LimitRejectsNegativeArguments) {
  EXPECT_EQ(error_of([] { (void)op_limit(leaf_a(), -1, 3); }), Errc::contract_violation);
  EXPECT_EQ(error_of([] { (void)op_limit(leaf_a(), 0, -3); }), Errc::contract_violation);
}

TEST(Operators, SetMapSelectsAMapping) {
  testing::TempDir dir;
  auto data = testing::weather_series();
  data.push_back(testing::wind_series(1));
  auto w = testing::make_world(dir.path(), data, {testing::kWeatherMapping, testing::kWindMapping});
  const auto leaf = op_match_scan({{Var{"o"}, Term::iri("hasValue"), Var{"v"}}});
  const auto all = run_store(w, leaf);
  const auto weather = run_store(w, op_set_map("weather", leaf));
  const auto wind = run_store(w, op_set_map("wind", leaf));
  EXPECT_EQ(all.rows.size(), weather.rows.size() + wind.rows.size());
  EXPECT_EQ(weather.rows.size(), 21U);
  EXPECT_EQ(error_of([&] { (void)run_store(w, op_set_map("nope", leaf)); }), Errc::not_found);
}

// ---- randomized trees: compressed store against the naive store -------------

struct Generated {
  OpPtr op;
  std::vector<std::string> columns;
};

class TreeGen {
 public:
  explicit TreeGen(std::uint64_t seed) : rng_(seed) {}

  Generated tree(int depth) {
    if (depth == 0 || pick(4) == 0) return leaf();
    switch (pick(12)) {
      case 0:
      case 1: {
        auto c = tree(depth - 1);
        return {op_filter(c.op, predicate(c.columns)), c.columns};
      }
      case 2: {
        auto a = tree(depth - 1);
        auto b = tree(depth - 1);
        auto cols = a.columns;
        for (const auto& x : b.columns) {
          if (std::find(cols.begin(), cols.end(), x) == cols.end()) cols.push_back(x);
        }
        return {op_union({a.op, b.op}), cols};
      }
      case 3:
      case 4: {
        auto a = tree(depth - 1);
        auto b = tree(depth - 1);
        const int kind = pick(3);
        auto cols = a.columns;
        if (kind != 1) {
          for (const auto& x : b.columns) {
            if (std::find(cols.begin(), cols.end(), x) == cols.end()) cols.push_back(x);
          }
        }
        if (kind == 0) return {op_join(a.op, b.op), cols};
        if (kind == 1) return {op_semi_join(a.op, b.op), cols};
        return {op_left_join(a.op, b.op), cols};
      }
      case 5: {
        auto a = tree(depth - 1);
        auto b = tree(depth - 1);
        return {op_minus(a.op, b.op), a.columns};
      }
      case 6: {
        auto c = tree(depth - 1);
        return {op_distinct(c.op), c.columns};
      }
      case 7: {
        auto c = tree(depth - 1);
        std::vector<SortKey> keys;
        keys.push_back({c.columns[pick(static_cast<int>(c.columns.size()))], 0, pick(2) == 0});
        return {op_sort(c.op, keys), c.columns};
      }
      case 8: {
        auto c = tree(depth - 1);
        std::vector<std::string> cols;
        for (const auto& x : c.columns) {
          if (pick(2) == 0) cols.push_back(x);
        }
        if (cols.empty()) cols.push_back(c.columns.back());
        return {op_project(c.op, cols), cols};
      }
      case 9: {
        auto c = tree(depth - 1);
        return {op_limit(c.op, pick(10), pick(2) == 0 ? std::optional<std::int64_t>{} : pick(30)), c.columns};
      }
      case 10: {
        auto c = tree(depth - 1);
        if (!has(c.columns, "x")) return c;
        const auto name = "e" + std::to_string(counter_++);
        auto cols = c.columns;
        cols.push_back(name);
        return {op_extend(c.op, name, binary("+", var("x"), lit(std::int64_t{1}))), cols};
      }
      default: {
        auto c = tree(depth - 1);
        std::vector<GroupKey> keys;
        std::vector<std::string> cols;
        for (const auto& k : {"k", "s", "x"}) {
          if (has(c.columns, k) && pick(2) == 0) {
            keys.push_back({GroupKey::Kind::column, k, 0, ""});
            cols.push_back(k);
          }
        }
        if (has(c.columns, "t") && pick(3) == 0) {
          keys.push_back({GroupKey::Kind::bucket, "t", 60'000'000'000, "minutes"});
          cols.push_back("t");
        }
        std::vector<AggSpec> aggs = {{AggOp::count, nullptr, "n" + std::to_string(counter_)}};
        cols.push_back(aggs[0].as);
        for (const auto& v : {"x", "y", "z"}) {
          if (has(c.columns, v)) {
            const AggOp ops[] = {AggOp::sum, AggOp::avg, AggOp::min, AggOp::max, AggOp::sample};
            aggs.push_back({ops[pick(5)], var(v), std::string(v) + "a" + std::to_string(counter_)});
            cols.push_back(aggs.back().as);
          }
        }
        ++counter_;
        return {op_aggregate(c.op, keys, aggs), cols};
      }
    }
  }

 private:
  int pick(int n) { return static_cast<int>(rng_() % static_cast<std::uint64_t>(n)); }
  static bool has(const std::vector<std::string>& cols, const std::string& c) {
    return std::find(cols.begin(), cols.end(), c) != cols.end();
  }

  Generated leaf() {
    switch (pick(4)) {
      case 0: return {leaf_a(), {"s", "o", "x", "y", "k", "t"}};
      case 1: return {leaf_b(), {"s", "o", "x", "z", "t"}};
      case 2: return {leaf_any(), {"s", "o", "x", "t"}};
      default: return {leaf_sensors(), {"s"}};
    }
  }

  ExprPtr atom(const std::vector<std::string>& cols) {
    const auto& c = cols[pick(static_cast<int>(cols.size()))];
    const char* ops[] = {"<", "<=", ">", ">=", "=", "!="};
    const std::string op = ops[pick(6)];
    if (c == "t") {
      const auto offset = static_cast<std::int64_t>(pick(100));
      if (pick(2) == 0) return binary(op, var(c), lit(Time{(testing::kApril1 + offset) * 1000 + pick(2) * 500,
                                                           TimestampPrecision::milliseconds}));
      return binary(op, var(c), lit(format_rfc3339(testing::kApril1 + offset, TimestampPrecision::seconds)));
    }
    if (c == "x" || c[0] == 'e' || c[0] == 'n') return binary(op, var(c), lit(std::int64_t{pick(6)}));
    if (c == "y" || c == "z" || c.find('a') != std::string::npos) return binary(op, var(c), lit(pick(100) / 10.0));
    if (c == "k") return binary(op, var(c), lit(std::string(1, static_cast<char>('a' + pick(3)))));
    return binary("=", var(c), lit(std::string(pick(2) == 0 ? "sensA" : "obsB")));
  }

  ExprPtr predicate(const std::vector<std::string>& cols) {
    auto e = atom(cols);
    const int extra = pick(3);
    for (int i = 0; i < extra; ++i) e = binary(pick(3) == 0 ? "||" : "&&", e, atom(cols));
    return e;
  }

  std::mt19937_64 rng_;
  int counter_ = 0;
};

TEST(Execute, RandomTreesAgreeWithTheNaiveStore) {
  testing::TempDir dir;
  auto w = testing::make_world(dir.path(), toy_series(77, 120, 90), {kToyMapping}, 512);
  TreeGen gen(4242);
  std::size_t nonempty = 0;
  std::size_t errors = 0;
  for (int i = 0; i < 100; ++i) {
    const auto g = gen.tree(4);
    std::optional<ResultTable> a;
    std::optional<ResultTable> b;
    Errc ea = Errc::end_of_stream;
    Errc eb = Errc::end_of_stream;
    const ExecOptions options{true, false};
    try {
      a = run_store(w, g.op, options);
    } catch (const Error& e) {
      ea = e.code();
    }
    try {
      b = run_naive(w, g.op, options);
    } catch (const Error& e) {
      eb = e.code();
    }
    ASSERT_EQ(a.has_value(), b.has_value()) << explain(*g.op);
    if (!a) {
      EXPECT_EQ(ea, eb);
      ++errors;
      continue;
    }
    EXPECT_TRUE(same_rows_ordered(*a, *b)) << explain(*g.op) << dump(*a) << "vs\n" << dump(*b);
    nonempty += a->rows.empty() ? 0 : 1;
  }
  EXPECT_GT(nonempty, 40U);
  EXPECT_LT(errors, 20U);
}

TEST(Execute, QueriesRunWhileIngesting) {
  testing::TempDir dir;
  auto data = testing::wind_series(1);
  auto w = testing::make_world(dir.path(), {data}, {testing::kWindMapping});
  const auto plan = parse_query("SELECT (COUNT(?v) AS ?n) WHERE { ?o hasValue ?v }");
  std::atomic<bool> done{false};
  std::thread writer([&] {
    std::int64_t t = data.rows.back().timestamp;
    for (int i = 0; i < 3000; ++i) w.store->insert("weatherTs", Row{++t, {Value{1.0}}});
    done = true;
  });
  std::int64_t last = 0;
  while (!done) {
    const auto got = run_store(w, plan);
    const auto n = std::get<std::int64_t>(got.rows.at(0).at(0));
    EXPECT_GE(n, last);
    last = n;
  }
  writer.join();
  const auto final = run_store(w, plan);
  EXPECT_EQ(std::get<std::int64_t>(final.rows[0][0]), static_cast<std::int64_t>(data.rows.size() + 3000));
}

}  // namespace
}  // namespace trt::query
