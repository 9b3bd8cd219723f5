#include "trt/query/match.hpp"

#include <algorithm>
#include <set>

namespace trt::query {

std::string to_string(const PatternTerm& t) {
  if (const auto* v = std::get_if<Var>(&t)) return "?" + v->name;
  return to_string(std::get<Term>(t));
}

std::string to_string(const TriplePattern& p) {
  return to_string(p.subject) + " " + to_string(p.predicate) + " " + to_string(p.object);
}

std::vector<std::string> variables(const BasicGraphPattern& bgp) {
  std::vector<std::string> out;
  auto add = [&](const PatternTerm& t) {
    if (const auto* v = std::get_if<Var>(&t)) {
      if (std::find(out.begin(), out.end(), v->name) == out.end()) out.push_back(v->name);
    }
  };
  for (const auto& p : bgp) {
    add(p.subject);
    add(p.predicate);
    add(p.object);
  }
  return out;
}

namespace {

class Matcher {
 public:
  Matcher(const BasicGraphPattern& bgp, const ModelMapping& mapping) : mapping_(mapping) {
    // Evaluate patterns with more constants first; ties keep query order.
    order_.resize(bgp.size());
    for (std::size_t i = 0; i < bgp.size(); ++i) order_[i] = &bgp[i];
    std::stable_sort(order_.begin(), order_.end(), [](const TriplePattern* a, const TriplePattern* b) {
      return constants(*a) > constants(*b);
    });
  }

  std::vector<BindingMatch> run() {
    search(0);
    std::vector<BindingMatch> out;
    out.reserve(results_.size());
    for (const auto& assignment : results_) {
      BindingMatch m;
      for (const auto& [name, term] : assignment) {
        const auto* b = mapping_.binding(term);
        m.emplace(name, MatchTarget{term, b ? std::optional<BindTarget>(*b) : std::nullopt});
      }
      out.push_back(std::move(m));
    }
    return out;
  }

 private:
  static int constants(const TriplePattern& p) {
    return std::holds_alternative<Term>(p.subject) + std::holds_alternative<Term>(p.predicate) +
           std::holds_alternative<Term>(p.object);
  }

  // Unifies one pattern term with a model term, recording new variables in `added`.
  bool unify(const PatternTerm& pt, const Term& value, std::vector<std::string>& added) {
    if (const auto* t = std::get_if<Term>(&pt)) return *t == value;
    const auto& name = std::get<Var>(pt).name;
    const auto it = assignment_.find(name);
    if (it != assignment_.end()) return it->second == value;
    assignment_.emplace(name, value);
    added.push_back(name);
    return true;
  }

  void search(std::size_t depth) {
    if (depth == order_.size()) {
      results_.insert(assignment_);
      return;
    }
    const auto& p = *order_[depth];
    for (const auto& t : mapping_.triples) {
      std::vector<std::string> added;
      if (unify(p.subject, t.subject, added) && unify(p.predicate, t.predicate, added) &&
          unify(p.object, t.object, added)) {
        search(depth + 1);
      }
      for (const auto& name : added) assignment_.erase(name);
    }
  }

  const ModelMapping& mapping_;
  std::vector<const TriplePattern*> order_;
  std::map<std::string, Term> assignment_;
  std::set<std::map<std::string, Term>> results_;
};

}  // namespace

std::vector<BindingMatch> match(const BasicGraphPattern& bgp, const ModelMapping& mapping) {
  return Matcher(bgp, mapping).run();
}

}  // namespace trt::query
