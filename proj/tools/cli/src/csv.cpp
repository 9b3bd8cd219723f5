#include "trtcli/csv.hpp"

#include "trt/error.hpp"

namespace trt::cli {

bool CsvReader::next(std::vector<std::string>& fields) {
  std::string line;
  for (;;) {
    if (!std::getline(in_, line)) return false;
    ++line_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) break;
  }
  record_line_ = line_;
  fields.clear();
  std::string field;
  bool quoted = false;
  std::size_t i = 0;
  for (;;) {
    if (i == line.size()) {
      if (!quoted) break;
      std::string more;
      if (!std::getline(in_, more)) {
        throw ParseError(record_line_, 1, "unterminated quoted field");
      }
      ++line_;
      if (!more.empty() && more.back() == '\r') more.pop_back();
      field += '\n';
      line = std::move(more);
      i = 0;
      continue;
    }
    const char c = line[i++];
    if (quoted) {
      if (c != '"') {
        field += c;
      } else if (i < line.size() && line[i] == '"') {
        field += '"';
        ++i;
      } else {
        quoted = false;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field += c;
    }
  }
  fields.push_back(std::move(field));
  return true;
}

OutputFormat parse_output_format(std::string_view name) {
  if (name == "csv") return OutputFormat::csv;
  if (name == "tsv") return OutputFormat::tsv;
  fail(Errc::contract_violation, "unknown output format '" + std::string(name) + "'");
}

void write_record(std::ostream& out, const std::vector<std::string>& fields, OutputFormat format) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    const auto& f = fields[i];
    if (format == OutputFormat::csv) {
      if (i) out << ',';
      if (f.find_first_of(",\"\n\r") == std::string::npos) {
        out << f;
        continue;
      }
      out << '"';
      for (const char c : f) {
        if (c == '"') out << '"';
        out << c;
      }
      out << '"';
    } else {
      if (i) out << '\t';
      for (const char c : f) {
        switch (c) {
          case '\t': out << "\\t"; break;
          case '\n': out << "\\n"; break;
          case '\r': out << "\\r"; break;
          case '\\': out << "\\\\"; break;
          default: out << c;
        }
      }
    }
  }
  out << '\n';
}

}  // namespace trt::cli
