#include "sdflow/csv.hpp"

#include <cstdio>
#include <stdexcept>

#include "sdflow/errors.hpp"

namespace sdflow {

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& columns)
    : out_(path, std::ios::binary), cols_(columns.size()), path_(path) {
  if (!out_) throw IoError("cannot open for writing: " + path);
  for (std::size_t i = 0; i < columns.size(); ++i)
    out_ << (i ? "," : "") << columns[i];
  out_ << "\n";
}

void CsvWriter::row(const std::vector<double>& values) {
  if (values.size() != cols_) throw std::invalid_argument("csv row width mismatch");
  for (std::size_t i = 0; i < values.size(); ++i)
    out_ << (i ? "," : "") << g17(values[i]);
  out_ << "\n";
  if (!out_) throw IoError("write failed: " + path_);
}

}  // namespace sdflow
