#include "trt/error.hpp"

namespace trt {

const char* to_string(Errc code) noexcept {
  switch (code) {
    case Errc::contract_violation: return "contract violation";
    case Errc::end_of_stream: return "end of stream";
    case Errc::corruption: return "corruption";
    case Errc::not_found: return "not found";
    case Errc::already_exists: return "already exists";
    case Errc::type_error: return "type error";
    case Errc::empty_aggregate: return "empty aggregate";
    case Errc::io_error: return "I/O error";
    case Errc::parse_error: return "parse error";
    case Errc::unsupported_feature: return "unsupported feature";
    case Errc::unbound_variable: return "unbound variable";
    case Errc::ambiguous_column: return "ambiguous column";
  }
  return "unknown error";
}

ParseError::ParseError(std::size_t line, std::size_t column, const std::string& message)
    : Error(Errc::parse_error,
            "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message),
      line_(line),
      column_(column) {}

void fail(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace trt
