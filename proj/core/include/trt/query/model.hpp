#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace trt::query {

// An RDF-style node: an IRI (bare or <...> in text form) or a literal.
struct Term {
  enum class Kind : std::uint8_t { iri, literal };
  Kind kind = Kind::iri;
  std::string text;

  [[nodiscard]] static Term iri(std::string text) { return {Kind::iri, std::move(text)}; }
  [[nodiscard]] static Term literal(std::string text) { return {Kind::literal, std::move(text)}; }

  friend bool operator==(const Term&, const Term&) = default;
  friend auto operator<=>(const Term&, const Term&) = default;
};

[[nodiscard]] std::string to_string(const Term& t);

// The IRI written as `a` in predicate position.
inline constexpr std::string_view rdf_type = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";

struct Triple {
  Term subject;
  Term predicate;
  Term object;

  friend bool operator==(const Triple&, const Triple&) = default;
  friend auto operator<=>(const Triple&, const Triple&) = default;
};

// Where a model node's values live: one column of a series, or its time axis.
struct BindTarget {
  std::string series;
  std::string column;  // empty for the time axis
  [[nodiscard]] bool is_time() const noexcept { return column.empty(); }

  friend bool operator==(const BindTarget&, const BindTarget&) = default;
  friend auto operator<=>(const BindTarget&, const BindTarget&) = default;
};

[[nodiscard]] std::string to_string(const BindTarget& b);

// A graph model plus its bindings of nodes to series columns.
struct ModelMapping {
  std::string name;
  std::vector<Triple> triples;
  std::map<Term, BindTarget> bindings;

  [[nodiscard]] const BindTarget* binding(const Term& node) const;
  [[nodiscard]] bool mentions(const Term& node) const;
};

// Parses the line-oriented mapping format:
//
//   # comment
//   @name weather                       mapping name (default: `name`)
//   @prefix ssn: <http://example.org/>  prefix for ssn:local terms
//   sensor1 isA windSensor              subject predicate object
//   obs1 a Observation                  `a` is rdf:type
//   obs1 hasTime "2017-06-01 15:46:08"  quoted object is a literal
//   @bind wsVal weather.wind_speed      node bound to a column
//   @bind obsTime weather.@time         node bound to the time axis
//
// Throws ParseError with the line number. A binding whose node appears in no
// triple is rejected.
[[nodiscard]] ModelMapping map_load(std::string_view text, std::string name = "default");

// Named mappings. Matching without a graph uses the union of all of them.
class MappingSet {
 public:
  // Throws already_exists for a repeated name and contract_violation when a
  // node is bound to different targets by two mappings.
  void add(ModelMapping mapping);
  [[nodiscard]] const ModelMapping& get(std::string_view name) const;  // not_found
  [[nodiscard]] bool contains(std::string_view name) const;
  [[nodiscard]] const ModelMapping& merged() const noexcept { return merged_; }
  [[nodiscard]] std::vector<std::string> names() const;
  [[nodiscard]] bool empty() const noexcept { return mappings_.empty(); }

 private:
  std::map<std::string, ModelMapping, std::less<>> mappings_;
  ModelMapping merged_;
};

}  // namespace trt::query
