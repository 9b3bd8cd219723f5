#pragma once

#include <string_view>

#include "trt/query/plan.hpp"

namespace trt::query {

// Parses a query of the supported SPARQL subset into an operator tree:
//
//   where -> aggregate -> extend (select expressions) -> sort -> project
//         -> distinct -> limit
//
// Syntax errors throw ParseError with line and column. Property paths,
// subqueries, SERVICE, VALUES, FROM, HAVING, CONSTRUCT/ASK/DESCRIBE and
// FORECAST throw unsupported_feature. The grammar is in docs/query-language.md.
[[nodiscard]] OpPtr parse_query(std::string_view text);

}  // namespace trt::query
