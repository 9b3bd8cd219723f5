#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace trt::cli {

// Comma-separated records with optional double-quoted fields. Quoted fields
// may contain commas, doubled quotes and line breaks.
class CsvReader {
 public:
  explicit CsvReader(std::istream& in) : in_(in) {}

  // Reads the next record. Blank lines are skipped. Throws parse_error on an
  // unterminated quote.
  bool next(std::vector<std::string>& fields);
  // Line on which the last record started, 1-based.
  [[nodiscard]] std::size_t line() const noexcept { return record_line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 0;
  std::size_t record_line_ = 0;
};

enum class OutputFormat { csv, tsv };

[[nodiscard]] OutputFormat parse_output_format(std::string_view name);

// Writes one record, quoting CSV fields that need it and escaping tabs,
// newlines and backslashes in TSV fields.
void write_record(std::ostream& out, const std::vector<std::string>& fields, OutputFormat format);

}  // namespace trt::cli
