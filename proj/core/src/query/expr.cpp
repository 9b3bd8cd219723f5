#include "trt/query/expr.hpp"

#include <cmath>

#include "trt/analytics.hpp"
#include "trt/error.hpp"
#include "trt/timefmt.hpp"

namespace trt::query {

namespace {

ExprPtr make(Expr e) { return std::make_shared<const Expr>(std::move(e)); }

}  // namespace

ExprPtr lit(Cell value) { return make(Expr{Expr::Kind::literal, std::move(value), {}, 0, {}}); }

ExprPtr time_lit(std::string_view rfc3339) {
  const auto t = parse_rfc3339(rfc3339, TimestampPrecision::nanoseconds);
  return lit(Time{t.ticks, TimestampPrecision::nanoseconds});
}

ExprPtr var(std::string name) { return make(Expr{Expr::Kind::variable, Null{}, std::move(name), 0, {}}); }

ExprPtr unary(std::string op, ExprPtr a) {
  return make(Expr{Expr::Kind::unary, Null{}, std::move(op), 0, {std::move(a)}});
}

ExprPtr binary(std::string op, ExprPtr a, ExprPtr b) {
  return make(Expr{Expr::Kind::binary, Null{}, std::move(op), 0, {std::move(a), std::move(b)}});
}

ExprPtr call(std::string fn, std::vector<ExprPtr> args) {
  return make(Expr{Expr::Kind::call, Null{}, std::move(fn), 0, std::move(args)});
}

ExprPtr duration(std::int64_t nanoseconds) { return make(Expr{Expr::Kind::duration, Null{}, {}, nanoseconds, {}}); }

ExprPtr conjunction(const std::vector<ExprPtr>& terms) {
  ExprPtr out;
  for (const auto& t : terms) out = out ? binary("&&", out, t) : t;
  return out;
}

bool expr_equal(const ExprPtr& a, const ExprPtr& b) {
  if (!a || !b) return !a && !b;
  if (a->kind != b->kind || a->name != b->name || a->nanoseconds != b->nanoseconds ||
      !same_cell(a->value, b->value) || a->args.size() != b->args.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a->args.size(); ++i) {
    if (!expr_equal(a->args[i], b->args[i])) return false;
  }
  return true;
}

std::string to_string(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::literal:
      if (std::holds_alternative<std::string>(e.value)) return "\"" + std::get<std::string>(e.value) + "\"";
      if (std::holds_alternative<Time>(e.value)) return "\"" + to_text(e.value) + "\"^^xsd:dateTime";
      return to_text(e.value);
    case Expr::Kind::variable: return "?" + e.name;
    case Expr::Kind::unary: return e.name + to_string(*e.args[0]);
    case Expr::Kind::binary: return "(" + to_string(*e.args[0]) + " " + e.name + " " + to_string(*e.args[1]) + ")";
    case Expr::Kind::call: {
      std::string s = e.name + "(";
      for (std::size_t i = 0; i < e.args.size(); ++i) s += (i ? ", " : "") + to_string(*e.args[i]);
      return s + ")";
    }
    case Expr::Kind::duration: return std::to_string(e.nanoseconds) + "ns";
  }
  return {};
}

void collect_variables(const Expr& e, std::set<std::string>& out) {
  if (e.kind == Expr::Kind::variable) out.insert(e.name);
  for (const auto& a : e.args) collect_variables(*a, out);
}

void split_conjuncts(const ExprPtr& e, std::vector<ExprPtr>& out) {
  if (!e) return;
  if (e->kind == Expr::Kind::binary && e->name == "&&") {
    split_conjuncts(e->args[0], out);
    split_conjuncts(e->args[1], out);
  } else {
    out.push_back(e);
  }
}

bool is_scalar_function(std::string_view name) noexcept {
  return name == "abs" || name == "ceil" || name == "floor" || name == "round" || name == "str" ||
         name == "bound" || bucket_function_width(name) != 0;
}

std::int64_t bucket_function_width(std::string_view name) noexcept {
  constexpr std::int64_t s = 1'000'000'000;
  if (name == "minutes") return 60 * s;
  if (name == "hours") return 3600 * s;
  if (name == "days") return 86400 * s;
  return 0;
}

std::optional<Time> parse_time_text(const std::string& text) {
  try {
    const auto t = parse_rfc3339(text, TimestampPrecision::nanoseconds);
    return Time{t.ticks, TimestampPrecision::nanoseconds};
  } catch (const Error&) {
    return std::nullopt;
  }
}

namespace {

bool is_numeric(const Cell& c) {
  return std::holds_alternative<double>(c) || std::holds_alternative<std::int64_t>(c) ||
         std::holds_alternative<bool>(c);
}

double numeric(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return *d;
  if (const auto* i = std::get_if<std::int64_t>(&c)) return static_cast<double>(*i);
  return std::get<bool>(c) ? 1.0 : 0.0;
}

[[noreturn]] void type_error(const std::string& op, const Cell& a, const Cell& b) {
  fail(Errc::type_error,
       "operator " + op + " cannot combine " + std::string(type_name(a)) + " and " + type_name(b));
}

// Converts the non-time side of a comparison with a time into a time.
Time as_time(const Cell& c, const Time& other, const std::string& op, const Cell& time_side) {
  if (const auto* t = std::get_if<Time>(&c)) return *t;
  if (const auto* i = std::get_if<std::int64_t>(&c)) return Time{*i, other.precision};
  if (const auto* s = std::get_if<std::string>(&c)) {
    if (auto t = parse_time_text(*s)) return *t;
  }
  type_error(op, time_side, c);
}

void note_truncation(const Time& literal, const Time& column, EvalContext& ctx) {
  if (ctx.warnings == nullptr) return;
  if (ticks_per_second(literal.precision) <= ticks_per_second(column.precision)) return;
  const auto coarse = convert_ticks(literal.ticks, literal.precision, column.precision);
  if (convert_ticks(coarse, column.precision, literal.precision) != literal.ticks) {
    ctx.warnings->insert("time literal " + to_text(Cell{literal}) + " truncated to " +
                         std::string(to_string(column.precision)) + " precision");
  }
}

// -1, 0, 1 for ordered operands.
int compare(const Cell& a, const Cell& b, const std::string& op, EvalContext& ctx) {
  if (std::holds_alternative<Time>(a) || std::holds_alternative<Time>(b)) {
    const bool left = std::holds_alternative<Time>(a);
    const Time& t = std::get<Time>(left ? a : b);
    const Time other = as_time(left ? b : a, t, op, left ? a : b);
    if (left) {
      note_truncation(other, t, ctx);
      return compare_time(t, other);
    }
    note_truncation(other, t, ctx);
    return compare_time(other, t);
  }
  if (is_numeric(a) && is_numeric(b)) {
    if (std::holds_alternative<std::int64_t>(a) && std::holds_alternative<std::int64_t>(b)) {
      const auto x = std::get<std::int64_t>(a);
      const auto y = std::get<std::int64_t>(b);
      return x < y ? -1 : (x > y ? 1 : 0);
    }
    const double x = numeric(a);
    const double y = numeric(b);
    if (std::isnan(x) || std::isnan(y)) return 2;  // unordered
    return x < y ? -1 : (x > y ? 1 : 0);
  }
  if (std::holds_alternative<std::string>(a) && std::holds_alternative<std::string>(b)) {
    const int c = std::get<std::string>(a).compare(std::get<std::string>(b));
    return c < 0 ? -1 : (c > 0 ? 1 : 0);
  }
  type_error(op, a, b);
}

Cell arithmetic(const std::string& op, const Cell& a, const Cell& b) {
  if (is_null(a) || is_null(b)) return Null{};
  if (const auto* t = std::get_if<Time>(&a)) {
    if (const auto* u = std::get_if<Time>(&b); u && op == "-") {
      return convert_ticks(t->ticks, t->precision, TimestampPrecision::nanoseconds) -
             convert_ticks(u->ticks, u->precision, TimestampPrecision::nanoseconds);
    }
    if (const auto* i = std::get_if<std::int64_t>(&b); i && (op == "+" || op == "-")) {
      return Time{op == "+" ? t->ticks + *i : t->ticks - *i, t->precision};
    }
    type_error(op, a, b);
  }
  if (!is_numeric(a) || !is_numeric(b) || std::holds_alternative<bool>(a) || std::holds_alternative<bool>(b)) {
    type_error(op, a, b);
  }
  if (std::holds_alternative<std::int64_t>(a) && std::holds_alternative<std::int64_t>(b) && op != "/") {
    const auto x = std::get<std::int64_t>(a);
    const auto y = std::get<std::int64_t>(b);
    std::int64_t r = 0;
    const bool overflow = op == "+"   ? __builtin_add_overflow(x, y, &r)
                          : op == "-" ? __builtin_sub_overflow(x, y, &r)
                                      : __builtin_mul_overflow(x, y, &r);
    if (!overflow) return r;
  }
  const double x = numeric(a);
  const double y = numeric(b);
  if (op == "+") return x + y;
  if (op == "-") return x - y;
  if (op == "*") return x * y;
  return x / y;
}

Cell call_function(const Expr& e, const std::vector<std::string>& columns, const std::vector<Cell>& row,
                   EvalContext& ctx) {
  const auto arity = [&](std::size_t n) {
    if (e.args.size() != n) {
      fail(Errc::contract_violation, e.name + "() takes " + std::to_string(n) + " argument(s)");
    }
  };
  if (e.name == "bound") {
    arity(1);
    if (e.args[0]->kind != Expr::Kind::variable) fail(Errc::type_error, "bound() needs a variable");
    return !is_null(evaluate(*e.args[0], columns, row, ctx));
  }
  if (const auto width = bucket_function_width(e.name); width != 0) {
    arity(1);
    const auto v = evaluate(*e.args[0], columns, row, ctx);
    if (is_null(v)) return Null{};
    const auto* t = std::get_if<Time>(&v);
    if (t == nullptr) fail(Errc::type_error, e.name + "() needs a time, got " + type_name(v));
    const auto w = convert_ticks(width, TimestampPrecision::nanoseconds, t->precision);
    return Time{bucket_start(t->ticks, w), t->precision};
  }
  if (e.name == "str") {
    arity(1);
    const auto v = evaluate(*e.args[0], columns, row, ctx);
    if (is_null(v)) return Null{};
    return to_text(v);
  }
  if (e.name == "abs" || e.name == "ceil" || e.name == "floor" || e.name == "round") {
    arity(1);
    const auto v = evaluate(*e.args[0], columns, row, ctx);
    if (is_null(v)) return Null{};
    if (const auto* i = std::get_if<std::int64_t>(&v)) return e.name == "abs" ? std::abs(*i) : *i;
    if (!std::holds_alternative<double>(v)) fail(Errc::type_error, e.name + "() needs a number");
    const double d = std::get<double>(v);
    if (e.name == "abs") return std::abs(d);
    if (e.name == "ceil") return std::ceil(d);
    if (e.name == "floor") return std::floor(d);
    return std::round(d);
  }
  fail(Errc::unsupported_feature, "function " + e.name + "() cannot be evaluated here");
}

}  // namespace

bool truthy(const Cell& c) {
  switch (c.index()) {
    case 0: return false;
    case 1: return std::get<double>(c) != 0 && !std::isnan(std::get<double>(c));
    case 2: return std::get<std::int64_t>(c) != 0;
    case 3: return std::get<bool>(c);
    case 4: return !std::get<std::string>(c).empty();
    default: return true;
  }
}

Cell evaluate(const Expr& e, const std::vector<std::string>& columns, const std::vector<Cell>& row,
              EvalContext& ctx) {
  switch (e.kind) {
    case Expr::Kind::literal: return e.value;
    case Expr::Kind::duration: return e.nanoseconds;
    case Expr::Kind::variable: {
      for (std::size_t i = 0; i < columns.size(); ++i) {
        if (columns[i] == e.name) return row[i];
      }
      fail(Errc::unbound_variable, "variable ?" + e.name + " is not in scope");
    }
    case Expr::Kind::unary: {
      const auto v = evaluate(*e.args[0], columns, row, ctx);
      if (is_null(v)) return Null{};
      if (e.name == "!") {
        if (!std::holds_alternative<bool>(v)) fail(Errc::type_error, std::string("operator ! needs a bool, got ") + type_name(v));
        return !std::get<bool>(v);
      }
      if (const auto* i = std::get_if<std::int64_t>(&v)) return -*i;
      if (const auto* d = std::get_if<double>(&v)) return -*d;
      fail(Errc::type_error, std::string("operator - needs a number, got ") + type_name(v));
    }
    case Expr::Kind::binary: {
      const auto& op = e.name;
      if (op == "&&" || op == "||") {
        // Three-valued logic: null acts as unknown.
        const auto a = evaluate(*e.args[0], columns, row, ctx);
        const bool and_op = op == "&&";
        if (!is_null(a) && truthy(a) != and_op) return !and_op;
        const auto b = evaluate(*e.args[1], columns, row, ctx);
        if (!is_null(b) && truthy(b) != and_op) return !and_op;
        if (is_null(a) || is_null(b)) return Null{};
        return and_op;
      }
      const auto a = evaluate(*e.args[0], columns, row, ctx);
      const auto b = evaluate(*e.args[1], columns, row, ctx);
      if (op == "+" || op == "-" || op == "*" || op == "/") return arithmetic(op, a, b);
      if (is_null(a) || is_null(b)) return Null{};
      if (std::holds_alternative<bool>(a) && std::holds_alternative<bool>(b) && (op == "=" || op == "!=")) {
        return (std::get<bool>(a) == std::get<bool>(b)) == (op == "=");
      }
      const int c = compare(a, b, op, ctx);
      if (c == 2) return op == "!=";
      if (op == "=") return c == 0;
      if (op == "!=") return c != 0;
      if (op == "<") return c < 0;
      if (op == "<=") return c <= 0;
      if (op == ">") return c > 0;
      if (op == ">=") return c >= 0;
      fail(Errc::contract_violation, "unknown operator " + op);
    }
    case Expr::Kind::call: return call_function(e, columns, row, ctx);
  }
  return Null{};
}

}  // namespace trt::query
