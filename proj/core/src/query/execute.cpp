#include "trt/query/execute.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <tuple>

#include "trt/analytics.hpp"
#include "trt/error.hpp"
#include "trt/timefmt.hpp"

namespace trt::query {

namespace {

using CellRow = std::vector<Cell>;

bool numeric_cell(const Cell& c) {
  return std::holds_alternative<double>(c) || std::holds_alternative<std::int64_t>(c) ||
         std::holds_alternative<bool>(c);
}

double numeric_value(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return *d;
  if (const auto* i = std::get_if<std::int64_t>(&c)) return static_cast<double>(*i);
  return std::get<bool>(c) ? 1.0 : 0.0;
}

// Sort order: numbers by value with NaN last, everything else by cell_less.
bool order_less(const Cell& a, const Cell& b) {
  if (numeric_cell(a) && numeric_cell(b)) {
    if (std::holds_alternative<std::int64_t>(a) && std::holds_alternative<std::int64_t>(b)) {
      return std::get<std::int64_t>(a) < std::get<std::int64_t>(b);
    }
    const double x = numeric_value(a);
    const double y = numeric_value(b);
    if (std::isnan(x) || std::isnan(y)) return !std::isnan(x) && std::isnan(y);
    return x < y;
  }
  return cell_less(a, b);
}

struct RowLess {
  bool operator()(const CellRow& a, const CellRow& b) const {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(), cell_less);
  }
};

bool time_less(const Time& a, const Time& b) { return compare_time(a, b) < 0; }

std::size_t require_column(const ResultTable& t, const std::string& name) {
  const auto idx = t.column_index(name);
  if (!idx) fail(Errc::unbound_variable, "variable ?" + name + " is not in scope");
  return *idx;
}

// ---- time bounds -----------------------------------------------------------

// A conjunct `?var op literal` that limits a time variable.
struct TimeBound {
  std::string var;
  std::string op;  // the variable is on the left
  bool ticks = false;  // integer literal in the column's own ticks
  Time time;
};

std::optional<TimeBound> as_time_bound(const ExprPtr& e) {
  if (!e || e->kind != Expr::Kind::binary) return std::nullopt;
  std::string op = e->name;
  if (op != "<" && op != "<=" && op != ">" && op != ">=" && op != "=") return std::nullopt;
  const Expr* v = e->args[0].get();
  const Expr* l = e->args[1].get();
  if (v->kind != Expr::Kind::variable) {
    std::swap(v, l);
    if (op[0] == '<') {
      op[0] = '>';
    } else if (op[0] == '>') {
      op[0] = '<';
    }
  }
  if (v->kind != Expr::Kind::variable || l->kind != Expr::Kind::literal) return std::nullopt;
  TimeBound b{v->name, op, false, {}};
  if (const auto* t = std::get_if<Time>(&l->value)) {
    b.time = *t;
  } else if (const auto* s = std::get_if<std::string>(&l->value)) {
    const auto parsed = parse_time_text(*s);
    if (!parsed) return std::nullopt;
    b.time = *parsed;
  } else if (const auto* i = std::get_if<std::int64_t>(&l->value)) {
    b.ticks = true;
    b.time.ticks = *i;
  } else {
    return std::nullopt;
  }
  return b;
}

struct Range {
  std::int64_t lo = min_time;
  std::int64_t hi = max_time;
  [[nodiscard]] bool empty() const noexcept { return lo > hi; }
  void intersect(const Range& o) {
    lo = std::max(lo, o.lo);
    hi = std::min(hi, o.hi);
  }
};

std::int64_t sat_add(std::int64_t a, std::int64_t b) {
  std::int64_t out = 0;
  if (__builtin_add_overflow(a, b, &out)) return b > 0 ? max_time : min_time;
  return out;
}

std::int64_t sat_mul(std::int64_t a, std::int64_t b) {
  std::int64_t out = 0;
  if (__builtin_mul_overflow(a, b, &out)) return a < 0 ? min_time : max_time;
  return out;
}

// Inclusive series-tick range of the rows for which `?var op literal` holds
// under the comparison rules of evaluate(): the finer side is truncated to
// the coarser precision before comparing.
Range bound_range(const TimeBound& b, TimestampPrecision series) {
  const TimestampPrecision lp = b.ticks ? series : b.time.precision;
  const TimestampPrecision coarse = ticks_per_second(lp) < ticks_per_second(series) ? lp : series;
  const std::int64_t lc = convert_ticks(b.time.ticks, lp, coarse);
  Range r;
  if (b.op == ">") r.lo = sat_add(lc, 1);
  if (b.op == ">=") r.lo = lc;
  if (b.op == "<") r.hi = sat_add(lc, -1);
  if (b.op == "<=") r.hi = lc;
  if (b.op == "=") r.lo = r.hi = lc;
  if (coarse != series) {
    const std::int64_t ratio = ticks_per_second(series) / ticks_per_second(coarse);
    if (r.lo != min_time) r.lo = sat_mul(r.lo, ratio);
    if (r.hi != max_time) r.hi = sat_add(sat_mul(r.hi, ratio), ratio - 1);
  }
  return r;
}

// Collects the conjuncts of a chain of filters above a leaf. Returns the leaf.
const OpNode* filter_chain(const OpNode& n, std::vector<const OpNode*>& chain) {
  const OpNode* cur = &n;
  while (cur->kind == OpKind::filter) {
    chain.push_back(cur);
    cur = cur->children[0].get();
  }
  return cur;
}

// ---- aggregates ------------------------------------------------------------

struct Accumulator {
  explicit Accumulator(AggOp o) : op(o) {}

  AggOp op;
  std::int64_t count = 0;
  double sum = 0;
  std::int64_t numeric_count = 0;
  std::optional<Cell> best;
  std::string concat;
  bool any_concat = false;

  void add_row() { ++count; }

  void add(const Cell& v) {
    if (is_null(v)) return;
    switch (op) {
      case AggOp::count: ++count; break;
      case AggOp::sum:
      case AggOp::avg:
        if (!numeric_cell(v)) {
          fail(Errc::type_error, std::string(to_string(op)) + " needs numbers, got " + type_name(v));
        }
        sum += numeric_value(v);
        ++numeric_count;
        break;
      case AggOp::min:
      case AggOp::max: {
        if (const auto* d = std::get_if<double>(&v); d && std::isnan(*d)) return;
        if (!best) {
          best = v;
          return;
        }
        const bool comparable = (numeric_cell(v) && numeric_cell(*best)) || v.index() == best->index();
        if (!comparable) {
          fail(Errc::type_error, std::string(to_string(op)) + " cannot compare " + type_name(v) + " and " +
                                     type_name(*best));
        }
        if (op == AggOp::min ? order_less(v, *best) : order_less(*best, v)) best = v;
        break;
      }
      case AggOp::sample:
        if (!best) best = v;
        break;
      case AggOp::group_concat: {
        const auto* s = std::get_if<std::string>(&v);
        if (s == nullptr) {
          fail(Errc::type_error, std::string("group_concat needs strings, got ") + type_name(v) + "; cast with str()");
        }
        if (any_concat) concat += ' ';
        concat += *s;
        any_concat = true;
        break;
      }
    }
  }

  [[nodiscard]] Cell result() const {
    switch (op) {
      case AggOp::count: return count;
      case AggOp::sum: return sum;
      case AggOp::avg: return numeric_count == 0 ? Cell{} : Cell{sum / static_cast<double>(numeric_count)};
      case AggOp::min:
      case AggOp::max:
      case AggOp::sample: return best ? *best : Cell{};
      case AggOp::group_concat: return concat;
    }
    return {};
  }
};

std::optional<AggFn> index_fn(AggOp op) {
  switch (op) {
    case AggOp::count: return AggFn::count;
    case AggOp::sum: return AggFn::sum;
    case AggOp::avg: return AggFn::avg;
    case AggOp::min: return AggFn::min;
    case AggOp::max: return AggFn::max;
    default: return std::nullopt;
  }
}

std::int64_t width_ticks(std::int64_t width_ns, TimestampPrecision p) {
  const std::int64_t ns_per_tick = 1'000'000'000 / ticks_per_second(p);
  const std::int64_t w = width_ns / ns_per_tick;
  if (w <= 0 || width_ns % ns_per_tick != 0) {
    fail(Errc::contract_violation, "window of " + std::to_string(width_ns) + " ns is not a whole number of " +
                                       to_string(p) + " ticks");
  }
  return w;
}

// ---- executor --------------------------------------------------------------

class Executor {
 public:
  Executor(DataSource& source, const MappingSet& mappings, const ExecOptions& options, ExecStats& stats)
      : source_(source), mappings_(mappings), options_(options), stats_(stats) {
    ctx_.warnings = &stats_.warnings;
  }

  ResultTable run(const OpNode& n, const ModelMapping& mapping) {
    switch (n.kind) {
      case OpKind::match_scan: return leaf(n, mapping, {});
      case OpKind::filter: return filter(n, mapping);
      case OpKind::join:
      case OpKind::semi_join:
      case OpKind::left_join:
        return join(run(*n.children[0], mapping), run(*n.children[1], mapping), n);
      case OpKind::union_all: {
        std::vector<ResultTable> parts;
        for (const auto& c : n.children) parts.push_back(run(*c, mapping));
        return union_tables(parts);
      }
      case OpKind::set_map: return run(*n.children[0], mappings_.get(n.graph));
      case OpKind::extend: return extend(run(*n.children[0], mapping), n);
      case OpKind::minus: return minus(run(*n.children[0], mapping), run(*n.children[1], mapping));
      case OpKind::aggregate: {
        if (auto fast = fast_aggregate(n, mapping)) return std::move(*fast);
        return aggregate(run(*n.children[0], mapping), n);
      }
      case OpKind::sort: return sort(run(*n.children[0], mapping), n);
      case OpKind::project: return project(run(*n.children[0], mapping), n);
      case OpKind::distinct: return distinct(run(*n.children[0], mapping));
      case OpKind::limit: return limit(run(*n.children[0], mapping), n);
    }
    fail(Errc::contract_violation, "unknown operator");
  }

 private:
  using ScanKey = std::tuple<std::string, std::int64_t, std::int64_t>;
  using ScanCache = std::map<ScanKey, std::vector<Row>>;

  const std::vector<Row>& scan(const std::string& series, const Range& r, ScanCache& cache) {
    const ScanKey key{series, r.lo, r.hi};
    auto it = cache.find(key);
    if (it == cache.end()) {
      stats_.scans.push_back({series, r.lo, r.hi});
      it = cache.emplace(key, r.empty() ? std::vector<Row>{} : source_.scan(series, r.lo, r.hi)).first;
    }
    return it->second;
  }

  static Range series_range(const BindingMatch& m, const std::string& series, TimestampPrecision p,
                            const std::vector<TimeBound>& bounds) {
    Range r;
    for (const auto& b : bounds) {
      const auto it = m.find(b.var);
      if (it == m.end() || !it->second.bound) continue;
      const auto& target = *it->second.bound;
      if (target.series == series && target.is_time()) r.intersect(bound_range(b, p));
    }
    return r;
  }

  ResultTable leaf(const OpNode& n, const ModelMapping& mapping, const std::vector<TimeBound>& bounds) {
    ResultTable out;
    out.columns = variables(n.bgp);
    std::vector<std::optional<Time>> times;
    ScanCache cache;
    for (const auto& m : match(n.bgp, mapping)) {
      std::vector<std::string> series;
      for (const auto& v : out.columns) {
        const auto& target = m.at(v).bound;
        if (target && std::find(series.begin(), series.end(), target->series) == series.end()) {
          series.push_back(target->series);
        }
      }
      if (series.empty()) {
        CellRow row;
        for (const auto& v : out.columns) row.emplace_back(m.at(v).node.text);
        out.rows.push_back(std::move(row));
        times.emplace_back();
        continue;
      }

      struct Source {
        const std::vector<Row>* rows;
        TimestampPrecision precision;
      };
      std::vector<Source> data;
      for (const auto& s : series) {
        const auto schema = source_.schema(s);
        data.push_back({&scan(s, series_range(m, s, schema.precision, bounds), cache), schema.precision});
      }

      // Where each variable's cell comes from: series slot and value column
      // (-1 for the time axis), or nothing for unbound nodes.
      struct Slot {
        std::optional<std::size_t> series;
        std::ptrdiff_t column = -1;
      };
      std::vector<Slot> slots;
      for (const auto& v : out.columns) {
        const auto& target = m.at(v).bound;
        Slot slot;
        if (target) {
          slot.series = static_cast<std::size_t>(std::find(series.begin(), series.end(), target->series) -
                                                 series.begin());
          if (!target->is_time()) {
            slot.column = static_cast<std::ptrdiff_t>(source_.schema(target->series).require_column(target->column));
          }
        }
        slots.push_back(slot);
      }

      // Rows of all series with equal timestamps, anchored on the first series.
      std::vector<std::vector<std::size_t>> combos;
      for (std::size_t i = 0; i < data[0].rows->size(); ++i) combos.push_back({i});
      for (std::size_t j = 1; j < data.size(); ++j) {
        std::vector<std::vector<std::size_t>> next;
        const auto& rows = *data[j].rows;
        for (const auto& c : combos) {
          const Time anchor{(*data[0].rows)[c[0]].timestamp, data[0].precision};
          const auto lo = std::partition_point(rows.begin(), rows.end(), [&](const Row& r) {
            return compare_time(Time{r.timestamp, data[j].precision}, anchor) < 0;
          });
          for (auto it = lo; it != rows.end() && compare_time(Time{it->timestamp, data[j].precision}, anchor) == 0;
               ++it) {
            auto extended = c;
            extended.push_back(static_cast<std::size_t>(it - rows.begin()));
            next.push_back(std::move(extended));
          }
        }
        combos = std::move(next);
      }

      for (const auto& c : combos) {
        CellRow row;
        for (std::size_t v = 0; v < out.columns.size(); ++v) {
          const auto& slot = slots[v];
          if (!slot.series) {
            row.emplace_back(m.at(out.columns[v]).node.text);
            continue;
          }
          const auto& src = data[*slot.series];
          const Row& r = (*src.rows)[c[*slot.series]];
          if (slot.column < 0) {
            row.emplace_back(Time{r.timestamp, src.precision});
          } else {
            row.push_back(to_cell(r.values[static_cast<std::size_t>(slot.column)]));
          }
        }
        out.rows.push_back(std::move(row));
        times.emplace_back(Time{(*data[0].rows)[c[0]].timestamp, data[0].precision});
      }
    }

    if (std::all_of(times.begin(), times.end(), [](const auto& t) { return t.has_value(); })) {
      std::vector<std::size_t> order(out.rows.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return time_less(*times[a], *times[b]); });
      ResultTable sorted;
      sorted.columns = std::move(out.columns);
      for (const auto i : order) {
        sorted.rows.push_back(std::move(out.rows[i]));
        sorted.times.push_back(*times[i]);
      }
      return sorted;
    }
    return out;
  }

  ResultTable filter(const OpNode& n, const ModelMapping& mapping) {
    std::vector<const OpNode*> chain;
    const OpNode* below = filter_chain(n, chain);
    ResultTable t;
    if (below->kind == OpKind::match_scan && options_.pushdown) {
      std::vector<TimeBound> bounds;
      for (const auto* f : chain) {
        std::vector<ExprPtr> conjuncts;
        split_conjuncts(f->expr, conjuncts);
        for (const auto& c : conjuncts) {
          if (auto b = as_time_bound(c)) bounds.push_back(std::move(*b));
        }
      }
      t = leaf(*below, mapping, bounds);
    } else {
      t = run(*below, mapping);
    }
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) t = apply_filter(std::move(t), *(*it)->expr);
    return t;
  }

  ResultTable apply_filter(ResultTable in, const Expr& predicate) {
    ResultTable out;
    out.columns = in.columns;
    for (std::size_t i = 0; i < in.rows.size(); ++i) {
      if (!truthy(evaluate(predicate, in.columns, in.rows[i], ctx_))) continue;
      out.rows.push_back(std::move(in.rows[i]));
      if (!in.times.empty()) out.times.push_back(in.times[i]);
    }
    return out;
  }

  ResultTable join(const ResultTable& l, const ResultTable& r, const OpNode& n) {
    std::vector<std::pair<std::size_t, std::size_t>> shared;
    std::vector<std::size_t> right_only;
    for (std::size_t j = 0; j < r.columns.size(); ++j) {
      if (auto i = l.column_index(r.columns[j])) {
        if (!n.natural) fail(Errc::ambiguous_column, "column ?" + r.columns[j] + " appears on both join inputs");
        shared.emplace_back(*i, j);
      } else {
        right_only.push_back(j);
      }
    }

    ResultTable out;
    out.columns = l.columns;
    std::vector<std::string> combined_columns = l.columns;
    for (const auto j : right_only) combined_columns.push_back(r.columns[j]);
    if (n.kind != OpKind::semi_join) out.columns = combined_columns;

    const auto partners = join_partners(l, r, shared);
    for (std::size_t i = 0; i < l.rows.size(); ++i) {
      bool matched = false;
      for (const auto j : partners(i)) {
        CellRow combined = l.rows[i];
        for (const auto k : right_only) combined.push_back(r.rows[j][k]);
        if (n.expr && !truthy(evaluate(*n.expr, combined_columns, combined, ctx_))) continue;
        matched = true;
        if (n.kind == OpKind::semi_join) break;
        out.rows.push_back(std::move(combined));
        if (!l.times.empty()) out.times.push_back(l.times[i]);
      }
      if ((n.kind == OpKind::semi_join && matched) || (n.kind == OpKind::left_join && !matched)) {
        CellRow row = l.rows[i];
        if (n.kind == OpKind::left_join) row.resize(out.columns.size());
        out.rows.push_back(std::move(row));
        if (!l.times.empty()) out.times.push_back(l.times[i]);
      }
    }
    return out;
  }

  // Right-row candidates for each left row: equal and non-null on every
  // shared column. A single time key over time-ordered inputs is matched by
  // a merge scan, other keys through an ordered map.
  static std::function<std::vector<std::size_t>(std::size_t)> join_partners(
      const ResultTable& l, const ResultTable& r, const std::vector<std::pair<std::size_t, std::size_t>>& shared) {
    if (shared.empty()) {
      std::vector<std::size_t> all(r.rows.size());
      std::iota(all.begin(), all.end(), std::size_t{0});
      return [all](std::size_t) { return all; };
    }

    const auto sorted_times = [](const ResultTable& t, std::size_t col) {
      for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto* x = std::get_if<Time>(&t.rows[i][col]);
        if (x == nullptr) return false;
        if (i > 0 && time_less(*x, std::get<Time>(t.rows[i - 1][col]))) return false;
      }
      return true;
    };
    if (shared.size() == 1 && sorted_times(l, shared[0].first) && sorted_times(r, shared[0].second)) {
      auto ranges = std::make_shared<std::vector<std::pair<std::size_t, std::size_t>>>();
      const auto lc = shared[0].first;
      const auto rc = shared[0].second;
      std::size_t lo = 0;
      for (const auto& row : l.rows) {
        const Time& key = std::get<Time>(row[lc]);
        while (lo < r.rows.size() && time_less(std::get<Time>(r.rows[lo][rc]), key)) ++lo;
        std::size_t hi = lo;
        while (hi < r.rows.size() && compare_time(std::get<Time>(r.rows[hi][rc]), key) == 0) ++hi;
        ranges->emplace_back(lo, hi);
      }
      return [ranges](std::size_t i) {
        std::vector<std::size_t> out((*ranges)[i].second - (*ranges)[i].first);
        std::iota(out.begin(), out.end(), (*ranges)[i].first);
        return out;
      };
    }

    auto index = std::make_shared<std::map<CellRow, std::vector<std::size_t>, RowLess>>();
    const auto key_of = [&shared](const CellRow& row, bool left) -> std::optional<CellRow> {
      CellRow key;
      for (const auto& [li, ri] : shared) {
        const Cell& c = row[left ? li : ri];
        if (is_null(c)) return std::nullopt;
        key.push_back(c);
      }
      return key;
    };
    for (std::size_t j = 0; j < r.rows.size(); ++j) {
      if (auto key = key_of(r.rows[j], false)) (*index)[*key].push_back(j);
    }
    auto left_keys = std::make_shared<std::vector<std::optional<CellRow>>>();
    for (const auto& row : l.rows) left_keys->push_back(key_of(row, true));
    return [index, left_keys](std::size_t i) -> std::vector<std::size_t> {
      const auto& key = (*left_keys)[i];
      if (!key) return {};
      const auto it = index->find(*key);
      return it == index->end() ? std::vector<std::size_t>{} : it->second;
    };
  }

  static ResultTable union_tables(std::vector<ResultTable>& parts) {
    ResultTable out;
    for (const auto& p : parts) {
      for (const auto& c : p.columns) {
        if (!out.column_index(c)) out.columns.push_back(c);
      }
    }
    const bool timed = std::all_of(parts.begin(), parts.end(), [](const ResultTable& p) { return p.timed(); });
    std::vector<Time> times;
    for (auto& p : parts) {
      std::vector<std::size_t> pos;
      for (const auto& c : p.columns) pos.push_back(*out.column_index(c));
      for (std::size_t i = 0; i < p.rows.size(); ++i) {
        CellRow row(out.columns.size());
        for (std::size_t k = 0; k < pos.size(); ++k) row[pos[k]] = std::move(p.rows[i][k]);
        out.rows.push_back(std::move(row));
        if (timed) times.push_back(p.times[i]);
      }
    }
    if (!timed) return out;
    // Inputs arrive time-ordered, so this is the merge step of a merge sort;
    // ties keep the earlier input first.
    std::vector<std::size_t> order(out.rows.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return time_less(times[a], times[b]); });
    ResultTable merged;
    merged.columns = std::move(out.columns);
    for (const auto i : order) {
      merged.rows.push_back(std::move(out.rows[i]));
      merged.times.push_back(times[i]);
    }
    return merged;
  }

  ResultTable extend(ResultTable in, const OpNode& n) {
    if (in.column_index(n.var)) fail(Errc::contract_violation, "variable ?" + n.var + " is already bound");
    in.columns.push_back(n.var);
    const std::vector<std::string> scope(in.columns.begin(), in.columns.end() - 1);
    for (auto& row : in.rows) row.push_back(evaluate(*n.expr, scope, row, ctx_));
    return in;
  }

  static ResultTable minus(ResultTable l, const ResultTable& r) {
    std::vector<std::pair<std::size_t, std::size_t>> shared;
    for (std::size_t j = 0; j < r.columns.size(); ++j) {
      if (auto i = l.column_index(r.columns[j])) shared.emplace_back(*i, j);
    }
    if (shared.empty()) return l;
    // Rows are removed when some right row agrees on every shared column
    // that both sides bind and both sides bind at least one of them.
    const auto removes = [&](const CellRow& a, const CellRow& b) {
      bool overlap = false;
      for (const auto& [li, ri] : shared) {
        if (is_null(a[li]) || is_null(b[ri])) continue;
        if (!same_cell(a[li], b[ri])) return false;
        overlap = true;
      }
      return overlap;
    };
    std::set<CellRow, RowLess> full_keys;
    std::vector<std::size_t> partial;
    for (std::size_t j = 0; j < r.rows.size(); ++j) {
      CellRow key;
      for (const auto& s : shared) key.push_back(r.rows[j][s.second]);
      if (std::none_of(key.begin(), key.end(), is_null)) {
        full_keys.insert(std::move(key));
      } else {
        partial.push_back(j);
      }
    }
    ResultTable out;
    out.columns = l.columns;
    for (std::size_t i = 0; i < l.rows.size(); ++i) {
      const auto& row = l.rows[i];
      CellRow key;
      for (const auto& s : shared) key.push_back(row[s.first]);
      bool removed = false;
      if (std::none_of(key.begin(), key.end(), is_null)) {
        removed = full_keys.count(key) > 0;
      } else {
        for (const auto& k : full_keys) {
          CellRow probe(r.columns.size());
          for (std::size_t s = 0; s < shared.size(); ++s) probe[shared[s].second] = k[s];
          if ((removed = removes(row, probe))) break;
        }
      }
      for (std::size_t p = 0; !removed && p < partial.size(); ++p) removed = removes(row, r.rows[partial[p]]);
      if (removed) continue;
      out.rows.push_back(row);
      if (!l.times.empty()) out.times.push_back(l.times[i]);
    }
    return out;
  }

  std::optional<ResultTable> fast_aggregate(const OpNode& n, const ModelMapping& mapping) {
    if (!options_.aggregate_fast_path || !n.group.empty() || n.aggregates.empty()) return std::nullopt;
    std::vector<const OpNode*> chain;
    const OpNode* leaf_node = filter_chain(*n.children[0], chain);
    if (leaf_node->kind != OpKind::match_scan) return std::nullopt;
    std::vector<TimeBound> bounds;
    for (const auto* f : chain) {
      std::vector<ExprPtr> conjuncts;
      split_conjuncts(f->expr, conjuncts);
      for (const auto& c : conjuncts) {
        auto b = as_time_bound(c);
        if (!b) return std::nullopt;
        bounds.push_back(std::move(*b));
      }
    }
    const auto matches = match(leaf_node->bgp, mapping);
    if (matches.size() != 1) return std::nullopt;
    const auto& m = matches[0];
    std::optional<std::string> series;
    for (const auto& [name, target] : m) {
      if (!target.bound) continue;
      if (series && *series != target.bound->series) return std::nullopt;
      series = target.bound->series;
    }
    if (!series) return std::nullopt;
    for (const auto& b : bounds) {
      const auto it = m.find(b.var);
      if (it == m.end() || !it->second.bound || !it->second.bound->is_time()) return std::nullopt;
    }
    const auto schema = source_.schema(*series);
    if (schema.columns.empty()) return std::nullopt;

    std::vector<std::pair<std::string, AggFn>> requests;
    for (const auto& a : n.aggregates) {
      const auto fn = index_fn(a.op);
      if (!fn) return std::nullopt;
      if (!a.arg) {
        if (a.op != AggOp::count) return std::nullopt;
        requests.emplace_back(schema.columns[0].name, AggFn::count);
        continue;
      }
      if (a.arg->kind != Expr::Kind::variable) return std::nullopt;
      const auto it = m.find(a.arg->name);
      if (it == m.end() || !it->second.bound || it->second.bound->is_time()) return std::nullopt;
      const auto col = schema.column_index(it->second.bound->column);
      if (!col || !is_numeric(schema.columns[*col].type)) return std::nullopt;
      requests.emplace_back(it->second.bound->column, *fn);
    }

    Range r = series_range(m, *series, schema.precision, bounds);
    ResultTable out;
    for (const auto& a : n.aggregates) out.columns.push_back(a.as);
    const auto rows = r.empty() ? std::optional<Value>{Value{std::int64_t{0}}}
                                : source_.aggregate(*series, schema.columns[0].name, AggFn::count, r.lo, r.hi);
    if (!rows) return std::nullopt;
    ++stats_.fast_aggregates;
    if (std::get<std::int64_t>(*rows) == 0) return out;
    CellRow row;
    for (const auto& [column, fn] : requests) {
      try {
        const auto v = source_.aggregate(*series, column, fn, r.lo, r.hi);
        if (!v) return std::nullopt;
        row.push_back(to_cell(*v));
      } catch (const Error& e) {
        if (e.code() != Errc::empty_aggregate) throw;
        row.emplace_back(Null{});
      }
    }
    out.rows.push_back(std::move(row));
    return out;
  }

  ResultTable aggregate(const ResultTable& in, const OpNode& n) {
    for (const auto& k : n.group) {
      if (k.kind == GroupKey::Kind::sma) return sma_aggregate(in, n);
    }
    std::vector<std::size_t> key_cols;
    for (const auto& k : n.group) key_cols.push_back(require_column(in, k.column));

    ResultTable out;
    for (const auto& k : n.group) out.columns.push_back(k.column);
    for (const auto& a : n.aggregates) out.columns.push_back(a.as);

    std::map<CellRow, std::vector<Accumulator>, RowLess> groups;
    for (const auto& row : in.rows) {
      CellRow key;
      for (std::size_t k = 0; k < n.group.size(); ++k) {
        const Cell& c = row[key_cols[k]];
        if (n.group[k].kind == GroupKey::Kind::bucket && !is_null(c)) {
          const auto* t = std::get_if<Time>(&c);
          if (t == nullptr) {
            fail(Errc::type_error, n.group[k].function + "() needs a time, got " + std::string(type_name(c)));
          }
          const auto w = width_ticks(n.group[k].width_ns, t->precision);
          key.emplace_back(Time{bucket_start(t->ticks, w), t->precision});
        } else {
          key.push_back(c);
        }
      }
      auto it = groups.find(key);
      if (it == groups.end()) {
        std::vector<Accumulator> accs;
        for (const auto& a : n.aggregates) accs.emplace_back(a.op);
        it = groups.emplace(std::move(key), std::move(accs)).first;
      }
      for (std::size_t a = 0; a < n.aggregates.size(); ++a) {
        const auto& spec = n.aggregates[a];
        if (!spec.arg) {
          it->second[a].add_row();
        } else {
          it->second[a].add(evaluate(*spec.arg, in.columns, row, ctx_));
        }
      }
    }

    // Output rows carry the bucket start of the first bucket key as time.
    std::ptrdiff_t bucket_key = -1;
    for (std::size_t k = 0; k < n.group.size() && bucket_key < 0; ++k) {
      if (n.group[k].kind == GroupKey::Kind::bucket) bucket_key = static_cast<std::ptrdiff_t>(k);
    }
    bool timed = bucket_key >= 0;
    for (const auto& [key, accs] : groups) {
      CellRow row = key;
      for (const auto& a : accs) row.push_back(a.result());
      if (timed) {
        if (const auto* t = std::get_if<Time>(&key[static_cast<std::size_t>(bucket_key)])) {
          out.times.push_back(*t);
        } else {
          timed = false;
          out.times.clear();
        }
      }
      out.rows.push_back(std::move(row));
    }
    if (timed && bucket_key != 0) {
      // Keep time order when the bucket is not the leading key.
      std::vector<std::size_t> order(out.rows.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return time_less(out.times[a], out.times[b]); });
      ResultTable sorted;
      sorted.columns = out.columns;
      for (const auto i : order) {
        sorted.rows.push_back(std::move(out.rows[i]));
        sorted.times.push_back(out.times[i]);
      }
      return sorted;
    }
    return out;
  }

  ResultTable sma_aggregate(const ResultTable& in, const OpNode& n) {
    if (n.group.size() != 1 || n.aggregates.size() != 1 || n.aggregates[0].op != AggOp::avg || !n.aggregates[0].arg) {
      fail(Errc::unsupported_feature, "sma() grouping needs exactly one AVG aggregate and no other keys");
    }
    const auto& key = n.group[0];
    const auto time_col = require_column(in, key.column);
    std::vector<std::pair<Time, double>> points;
    for (const auto& row : in.rows) {
      const Cell& t = row[time_col];
      if (is_null(t)) continue;
      const auto* time = std::get_if<Time>(&t);
      if (time == nullptr) fail(Errc::type_error, "sma() needs a time, got " + std::string(type_name(t)));
      const Cell v = evaluate(*n.aggregates[0].arg, in.columns, row, ctx_);
      if (is_null(v)) continue;
      if (!numeric_cell(v)) fail(Errc::type_error, "avg needs numbers, got " + std::string(type_name(v)));
      points.emplace_back(*time, numeric_value(v));
    }
    ResultTable out;
    out.columns = {key.column, n.aggregates[0].as};
    if (points.empty()) return out;
    std::stable_sort(points.begin(), points.end(), [](const auto& a, const auto& b) { return time_less(a.first, b.first); });
    const auto precision = points[0].first.precision;
    std::vector<std::int64_t> times;
    std::vector<double> values;
    for (const auto& [t, v] : points) {
      if (t.precision != precision) {
        fail(Errc::contract_violation, "sma() over times of mixed precision");
      }
      times.push_back(t.ticks);
      values.push_back(v);
    }
    for (const auto& p : trt::sma(times, values, width_ticks(key.width_ns, precision))) {
      const Time t{p.time, precision};
      out.rows.push_back({t, p.value});
      out.times.push_back(t);
    }
    return out;
  }

  static ResultTable sort(ResultTable in, const OpNode& n) {
    std::vector<std::pair<std::size_t, bool>> keys;
    for (const auto& k : n.order) {
      if (k.column.empty()) {
        if (k.ordinal < 0 || static_cast<std::size_t>(k.ordinal) >= in.columns.size()) {
          fail(Errc::contract_violation, "sort ordinal " + std::to_string(k.ordinal) + " is out of range");
        }
        keys.emplace_back(static_cast<std::size_t>(k.ordinal), k.descending);
      } else {
        keys.emplace_back(require_column(in, k.column), k.descending);
      }
    }
    std::vector<std::size_t> order(in.rows.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      for (const auto& [col, desc] : keys) {
        const Cell& x = in.rows[a][col];
        const Cell& y = in.rows[b][col];
        if (order_less(x, y)) return !desc;
        if (order_less(y, x)) return desc;
      }
      return false;
    });
    ResultTable out;
    out.columns = std::move(in.columns);
    for (const auto i : order) {
      out.rows.push_back(std::move(in.rows[i]));
      if (!in.times.empty()) out.times.push_back(in.times[i]);
    }
    return out;
  }

  static ResultTable project(ResultTable in, const OpNode& n) {
    ResultTable out;
    std::vector<std::size_t> cols;
    for (const auto& item : n.items) {
      cols.push_back(require_column(in, item.column));
      const auto& name = item.as.empty() ? item.column : item.as;
      if (out.column_index(name)) fail(Errc::ambiguous_column, "column ?" + name + " is projected twice");
      out.columns.push_back(name);
    }
    for (auto& row : in.rows) {
      CellRow projected;
      for (const auto c : cols) projected.push_back(std::move(row[c]));
      out.rows.push_back(std::move(projected));
    }
    out.times = std::move(in.times);
    return out;
  }

  static ResultTable distinct(ResultTable in) {
    ResultTable out;
    out.columns = in.columns;
    std::set<CellRow, RowLess> seen;
    for (std::size_t i = 0; i < in.rows.size(); ++i) {
      if (!seen.insert(in.rows[i]).second) continue;
      out.rows.push_back(std::move(in.rows[i]));
      if (!in.times.empty()) out.times.push_back(in.times[i]);
    }
    return out;
  }

  static ResultTable limit(ResultTable in, const OpNode& n) {
    const auto size = static_cast<std::int64_t>(in.rows.size());
    const auto begin = std::min(n.offset, size);
    const auto end = n.fetch ? begin + std::min(*n.fetch, size - begin) : size;
    ResultTable out;
    out.columns = std::move(in.columns);
    for (auto i = begin; i < end; ++i) {
      out.rows.push_back(std::move(in.rows[static_cast<std::size_t>(i)]));
      if (!in.times.empty()) out.times.push_back(in.times[static_cast<std::size_t>(i)]);
    }
    return out;
  }

  DataSource& source_;
  const MappingSet& mappings_;
  ExecOptions options_;
  ExecStats& stats_;
  EvalContext ctx_;
};

}  // namespace

ResultTable execute(const OpNode& root, DataSource& source, const MappingSet& mappings, const ExecOptions& options,
                    ExecStats* stats) {
  ExecStats local;
  Executor exec(source, mappings, options, stats ? *stats : local);
  return exec.run(root, mappings.merged());
}

}  // namespace trt::query
