#pragma once

#include <fstream>
#include <string>
#include <vector>

namespace sdflow {

// Shortest text form that survives a double round trip (17 significant digits).
std::string g17(double v);

// Comma-separated time series with a fixed header row.  All numeric cells go
// through g17 so files are diffable and bit-faithful.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& columns);
  void row(const std::vector<double>& values);  // size must match the header

 private:
  std::ofstream out_;
  std::size_t cols_;
  std::string path_;
};

}  // namespace sdflow
