#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "trt/query/expr.hpp"
#include "trt/query/match.hpp"
#include "trt/types.hpp"

namespace trt::query {

enum class OpKind : std::uint8_t {
  match_scan,  // leaf: match a BGP against the mapping, scan the bound series
  filter,
  join,
  semi_join,
  left_join,  // OPTIONAL
  union_all,
  set_map,
  extend,
  minus,
  aggregate,
  sort,
  project,
  distinct,
  limit,
};

[[nodiscard]] const char* to_string(OpKind k) noexcept;

enum class AggOp : std::uint8_t { count, sum, avg, min, max, sample, group_concat };
[[nodiscard]] const char* to_string(AggOp op) noexcept;

struct AggSpec {
  AggOp op = AggOp::count;
  ExprPtr arg;  // null for COUNT(*)
  std::string as;
};

// One GROUP BY key: a column, a time bucket of a time column (hours,
// minutes, days) or a moving-average window sma(time, tau).
struct GroupKey {
  enum class Kind : std::uint8_t { column, bucket, sma };
  Kind kind = Kind::column;
  std::string column;
  std::int64_t width_ns = 0;  // bucket width or sma horizon
  std::string function;       // hours/minutes/days for display
};

// ORDER BY key: a column name, or when `column` is empty a zero-based ordinal.
struct SortKey {
  std::string column;
  std::int64_t ordinal = 0;
  bool descending = false;
};

struct ProjectItem {
  std::string column;
  std::string as;  // empty keeps the name
};

struct OpNode;
using OpPtr = std::shared_ptr<const OpNode>;

struct OpNode {
  OpKind kind = OpKind::match_scan;
  BasicGraphPattern bgp;           // match_scan
  std::string graph;               // set_map
  ExprPtr expr;                    // filter predicate, join condition, extend value
  bool natural = true;             // joins: also equate shared column names
  std::string var;                 // extend target
  std::vector<GroupKey> group;     // aggregate
  std::vector<AggSpec> aggregates; // aggregate
  std::vector<SortKey> order;      // sort
  std::vector<ProjectItem> items;  // project
  std::int64_t offset = 0;         // limit
  std::optional<std::int64_t> fetch;
  std::vector<OpPtr> children;
};

[[nodiscard]] OpPtr op_match_scan(BasicGraphPattern bgp);
[[nodiscard]] OpPtr op_filter(OpPtr child, ExprPtr predicate);
// natural joins equate columns that share a name (SPARQL join semantics);
// other joins reject shared names as ambiguous when executed.
[[nodiscard]] OpPtr op_join(OpPtr left, OpPtr right, ExprPtr condition = nullptr, bool natural = true);
[[nodiscard]] OpPtr op_semi_join(OpPtr left, OpPtr right, ExprPtr condition = nullptr, bool natural = true);
[[nodiscard]] OpPtr op_left_join(OpPtr left, OpPtr right, ExprPtr condition = nullptr);
[[nodiscard]] OpPtr op_union(std::vector<OpPtr> children);
[[nodiscard]] OpPtr op_set_map(std::string graph, OpPtr child);
[[nodiscard]] OpPtr op_extend(OpPtr child, std::string var, ExprPtr value);
[[nodiscard]] OpPtr op_minus(OpPtr left, OpPtr right);
[[nodiscard]] OpPtr op_aggregate(OpPtr child, std::vector<GroupKey> keys, std::vector<AggSpec> aggregates);
[[nodiscard]] OpPtr op_sort(OpPtr child, std::vector<SortKey> keys);
[[nodiscard]] OpPtr op_project(OpPtr child, std::vector<ProjectItem> items);
[[nodiscard]] OpPtr op_project(OpPtr child, const std::vector<std::string>& columns);
[[nodiscard]] OpPtr op_distinct(OpPtr child);
// Throws contract_violation for a negative offset or fetch.
[[nodiscard]] OpPtr op_limit(OpPtr child, std::int64_t offset, std::optional<std::int64_t> fetch);

[[nodiscard]] bool structurally_equal(const OpNode& a, const OpNode& b);
// Indented one-node-per-line rendering.
[[nodiscard]] std::string explain(const OpNode& root);

}  // namespace trt::query
