#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

#include "trt/query/model.hpp"

namespace trt::query {

struct Var {
  std::string name;  // without '?'

  friend bool operator==(const Var&, const Var&) = default;
  friend auto operator<=>(const Var&, const Var&) = default;
};

using PatternTerm = std::variant<Var, Term>;

struct TriplePattern {
  PatternTerm subject;
  PatternTerm predicate;
  PatternTerm object;

  friend bool operator==(const TriplePattern&, const TriplePattern&) = default;
};

using BasicGraphPattern = std::vector<TriplePattern>;

[[nodiscard]] std::string to_string(const PatternTerm& t);
[[nodiscard]] std::string to_string(const TriplePattern& p);
// Variables in first-occurrence order.
[[nodiscard]] std::vector<std::string> variables(const BasicGraphPattern& bgp);

// What one variable matched: the model node and, when the node is bound, the
// series column (or time axis) holding its values.
struct MatchTarget {
  Term node;
  std::optional<BindTarget> bound;

  friend bool operator==(const MatchTarget&, const MatchTarget&) = default;
};

// One homomorphism of the pattern into the model.
using BindingMatch = std::map<std::string, MatchTarget>;

// Every assignment of the BGP's variables to model terms under which each
// pattern is a model triple. Distinct assignments appear once, ordered by
// their variable values.
[[nodiscard]] std::vector<BindingMatch> match(const BasicGraphPattern& bgp, const ModelMapping& mapping);

}  // namespace trt::query
