#include "trt/query/plan.hpp"

#include "trt/error.hpp"

namespace trt::query {

const char* to_string(OpKind k) noexcept {
  switch (k) {
    case OpKind::match_scan: return "match_scan";
    case OpKind::filter: return "filter";
    case OpKind::join: return "join";
    case OpKind::semi_join: return "semi_join";
    case OpKind::left_join: return "left_join";
    case OpKind::union_all: return "union";
    case OpKind::set_map: return "set_map";
    case OpKind::extend: return "extend";
    case OpKind::minus: return "minus";
    case OpKind::aggregate: return "aggregate";
    case OpKind::sort: return "sort";
    case OpKind::project: return "project";
    case OpKind::distinct: return "distinct";
    case OpKind::limit: return "limit";
  }
  return "?";
}

const char* to_string(AggOp op) noexcept {
  switch (op) {
    case AggOp::count: return "count";
    case AggOp::sum: return "sum";
    case AggOp::avg: return "avg";
    case AggOp::min: return "min";
    case AggOp::max: return "max";
    case AggOp::sample: return "sample";
    case AggOp::group_concat: return "group_concat";
  }
  return "?";
}

namespace {

OpPtr node(OpNode n) { return std::make_shared<const OpNode>(std::move(n)); }

OpNode with_children(OpKind kind, std::vector<OpPtr> children) {
  OpNode n;
  n.kind = kind;
  for (const auto& c : children) require(c != nullptr, "operator child must not be null");
  n.children = std::move(children);
  return n;
}

OpPtr join_like(OpKind kind, OpPtr left, OpPtr right, ExprPtr condition, bool natural) {
  auto n = with_children(kind, {std::move(left), std::move(right)});
  n.expr = std::move(condition);
  n.natural = natural;
  return node(std::move(n));
}

}  // namespace

OpPtr op_match_scan(BasicGraphPattern bgp) {
  OpNode n;
  n.kind = OpKind::match_scan;
  n.bgp = std::move(bgp);
  return node(std::move(n));
}

OpPtr op_filter(OpPtr child, ExprPtr predicate) {
  require(predicate != nullptr, "filter needs a predicate");
  auto n = with_children(OpKind::filter, {std::move(child)});
  n.expr = std::move(predicate);
  return node(std::move(n));
}

OpPtr op_join(OpPtr left, OpPtr right, ExprPtr condition, bool natural) {
  return join_like(OpKind::join, std::move(left), std::move(right), std::move(condition), natural);
}

OpPtr op_semi_join(OpPtr left, OpPtr right, ExprPtr condition, bool natural) {
  return join_like(OpKind::semi_join, std::move(left), std::move(right), std::move(condition), natural);
}

OpPtr op_left_join(OpPtr left, OpPtr right, ExprPtr condition) {
  return join_like(OpKind::left_join, std::move(left), std::move(right), std::move(condition), true);
}

OpPtr op_union(std::vector<OpPtr> children) {
  require(!children.empty(), "union needs at least one input");
  return node(with_children(OpKind::union_all, std::move(children)));
}

OpPtr op_set_map(std::string graph, OpPtr child) {
  auto n = with_children(OpKind::set_map, {std::move(child)});
  n.graph = std::move(graph);
  return node(std::move(n));
}

OpPtr op_extend(OpPtr child, std::string var, ExprPtr value) {
  require(value != nullptr, "extend needs an expression");
  auto n = with_children(OpKind::extend, {std::move(child)});
  n.var = std::move(var);
  n.expr = std::move(value);
  return node(std::move(n));
}

OpPtr op_minus(OpPtr left, OpPtr right) {
  return node(with_children(OpKind::minus, {std::move(left), std::move(right)}));
}

OpPtr op_aggregate(OpPtr child, std::vector<GroupKey> keys, std::vector<AggSpec> aggregates) {
  auto n = with_children(OpKind::aggregate, {std::move(child)});
  n.group = std::move(keys);
  n.aggregates = std::move(aggregates);
  return node(std::move(n));
}

OpPtr op_sort(OpPtr child, std::vector<SortKey> keys) {
  auto n = with_children(OpKind::sort, {std::move(child)});
  n.order = std::move(keys);
  return node(std::move(n));
}

OpPtr op_project(OpPtr child, std::vector<ProjectItem> items) {
  auto n = with_children(OpKind::project, {std::move(child)});
  n.items = std::move(items);
  return node(std::move(n));
}

OpPtr op_project(OpPtr child, const std::vector<std::string>& columns) {
  std::vector<ProjectItem> items;
  for (const auto& c : columns) items.push_back({c, {}});
  return op_project(std::move(child), std::move(items));
}

OpPtr op_distinct(OpPtr child) { return node(with_children(OpKind::distinct, {std::move(child)})); }

OpPtr op_limit(OpPtr child, std::int64_t offset, std::optional<std::int64_t> fetch) {
  require(offset >= 0, "limit offset must not be negative");
  require(!fetch || *fetch >= 0, "limit fetch must not be negative");
  auto n = with_children(OpKind::limit, {std::move(child)});
  n.offset = offset;
  n.fetch = fetch;
  return node(std::move(n));
}

bool structurally_equal(const OpNode& a, const OpNode& b) {
  if (a.kind != b.kind || a.bgp != b.bgp || a.graph != b.graph || !expr_equal(a.expr, b.expr) ||
      a.natural != b.natural || a.var != b.var || a.offset != b.offset || a.fetch != b.fetch ||
      a.children.size() != b.children.size() || a.group.size() != b.group.size() ||
      a.aggregates.size() != b.aggregates.size() || a.order.size() != b.order.size() ||
      a.items.size() != b.items.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.group.size(); ++i) {
    const auto& x = a.group[i];
    const auto& y = b.group[i];
    if (x.kind != y.kind || x.column != y.column || x.width_ns != y.width_ns) return false;
  }
  for (std::size_t i = 0; i < a.aggregates.size(); ++i) {
    const auto& x = a.aggregates[i];
    const auto& y = b.aggregates[i];
    if (x.op != y.op || x.as != y.as || !expr_equal(x.arg, y.arg)) return false;
  }
  for (std::size_t i = 0; i < a.order.size(); ++i) {
    const auto& x = a.order[i];
    const auto& y = b.order[i];
    if (x.column != y.column || x.ordinal != y.ordinal || x.descending != y.descending) return false;
  }
  for (std::size_t i = 0; i < a.items.size(); ++i) {
    if (a.items[i].column != b.items[i].column || a.items[i].as != b.items[i].as) return false;
  }
  for (std::size_t i = 0; i < a.children.size(); ++i) {
    if (!structurally_equal(*a.children[i], *b.children[i])) return false;
  }
  return true;
}

namespace {

void explain_into(const OpNode& n, int depth, std::string& out) {
  out += std::string(static_cast<std::size_t>(depth) * 2, ' ');
  out += to_string(n.kind);
  switch (n.kind) {
    case OpKind::match_scan: {
      out += " {";
      for (std::size_t i = 0; i < n.bgp.size(); ++i) out += (i ? " . " : " ") + to_string(n.bgp[i]);
      out += " }";
      break;
    }
    case OpKind::filter: out += " " + to_string(*n.expr); break;
    case OpKind::join:
    case OpKind::semi_join:
    case OpKind::left_join:
      out += n.natural ? " natural" : "";
      if (n.expr) out += " on " + to_string(*n.expr);
      break;
    case OpKind::set_map: out += " " + n.graph; break;
    case OpKind::extend: out += " ?" + n.var + " = " + to_string(*n.expr); break;
    case OpKind::aggregate: {
      out += " by [";
      for (std::size_t i = 0; i < n.group.size(); ++i) {
        const auto& k = n.group[i];
        out += i ? ", " : "";
        if (k.kind == GroupKey::Kind::column) out += "?" + k.column;
        if (k.kind == GroupKey::Kind::bucket) out += k.function + "(?" + k.column + ")";
        if (k.kind == GroupKey::Kind::sma) out += "sma(?" + k.column + ", " + std::to_string(k.width_ns) + "ns)";
      }
      out += "]";
      for (const auto& a : n.aggregates) {
        out += " " + std::string(to_string(a.op)) + "(" + (a.arg ? to_string(*a.arg) : "*") + ") as ?" + a.as;
      }
      break;
    }
    case OpKind::sort:
      for (const auto& k : n.order) {
        out += " " + (k.column.empty() ? "#" + std::to_string(k.ordinal) : "?" + k.column) + (k.descending ? " desc" : "");
      }
      break;
    case OpKind::project:
      for (const auto& i : n.items) out += " ?" + i.column + (i.as.empty() ? "" : " as ?" + i.as);
      break;
    case OpKind::limit:
      out += " offset " + std::to_string(n.offset) + (n.fetch ? " fetch " + std::to_string(*n.fetch) : "");
      break;
    default: break;
  }
  out += "\n";
  for (const auto& c : n.children) explain_into(*c, depth + 1, out);
}

}  // namespace

std::string explain(const OpNode& root) {
  std::string out;
  explain_into(root, 0, out);
  return out;
}

}  // namespace trt::query
