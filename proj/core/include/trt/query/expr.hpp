#pragma once

#include <memory>
#include <set>
#include <string>
#include <vector>

#include "trt/query/value.hpp"

namespace trt::query {

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

// Expression tree for FILTER, BIND, SELECT and join conditions.
//   literal   value
//   variable  name
//   unary     name in {"!", "-"}, args[0]
//   binary    name in {"||", "&&", "=", "!=", "<", "<=", ">", ">=", "+", "-", "*", "/"}
//   call      name is a lower-case function name, args
//   duration  nanoseconds, written as 90s, 15m, 1h, 1d, 1w or 250ms
struct Expr {
  enum class Kind : std::uint8_t { literal, variable, unary, binary, call, duration };
  Kind kind = Kind::literal;
  Cell value;
  std::string name;
  std::int64_t nanoseconds = 0;
  std::vector<ExprPtr> args;
};

[[nodiscard]] ExprPtr lit(Cell value);
[[nodiscard]] ExprPtr time_lit(std::string_view rfc3339);
[[nodiscard]] ExprPtr var(std::string name);
[[nodiscard]] ExprPtr unary(std::string op, ExprPtr a);
[[nodiscard]] ExprPtr binary(std::string op, ExprPtr a, ExprPtr b);
[[nodiscard]] ExprPtr call(std::string fn, std::vector<ExprPtr> args);
[[nodiscard]] ExprPtr duration(std::int64_t nanoseconds);
// Left-nested conjunction of the terms; null for an empty list.
[[nodiscard]] ExprPtr conjunction(const std::vector<ExprPtr>& terms);

[[nodiscard]] bool expr_equal(const ExprPtr& a, const ExprPtr& b);
[[nodiscard]] std::string to_string(const Expr& e);
void collect_variables(const Expr& e, std::set<std::string>& out);
// Splits a tree of && into its conjuncts.
void split_conjuncts(const ExprPtr& e, std::vector<ExprPtr>& out);

// Scalar functions usable in expressions.
[[nodiscard]] bool is_scalar_function(std::string_view name) noexcept;
// Nanoseconds per bucket of hours/minutes/days, or 0 for other names.
[[nodiscard]] std::int64_t bucket_function_width(std::string_view name) noexcept;

struct EvalContext {
  // Time literals that lost precision when compared with a coarser column.
  std::set<std::string>* warnings = nullptr;
};

// Evaluates against one row. References to columns absent from `columns`
// throw unbound_variable; operands of the wrong type throw type_error.
// Comparisons involving null yield null.
[[nodiscard]] Cell evaluate(const Expr& e, const std::vector<std::string>& columns, const std::vector<Cell>& row,
                            EvalContext& ctx);
// Effective boolean value: null is false; numbers are true when non-zero,
// strings when non-empty.
[[nodiscard]] bool truthy(const Cell& c);

// Parses a time value from a string cell, or nullopt when it is not one.
[[nodiscard]] std::optional<Time> parse_time_text(const std::string& text);

}  // namespace trt::query
