#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace trt {

enum class Errc {
  contract_violation,
  end_of_stream,
  corruption,
  not_found,
  already_exists,
  type_error,
  empty_aggregate,
  io_error,
  parse_error,
  unsupported_feature,
  unbound_variable,
  ambiguous_column,
};

const char* to_string(Errc code) noexcept;

// Every failure raised by the library carries one of the codes above so that
// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}

  [[nodiscard]] Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

// Parse failures keep the 1-based line and column of the offending input.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& message);

  [[nodiscard]] std::size_t line() const noexcept { return line_; }
  [[nodiscard]] std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

[[noreturn]] void fail(Errc code, const std::string& what);

inline void require(bool condition, const char* what) {
  if (!condition) fail(Errc::contract_violation, what);
}

}  // namespace trt
