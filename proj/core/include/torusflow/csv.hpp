#pragma once

#include <string>
#include <vector>

namespace torusflow {

/// CSV writer with fixed 17-significant-digit numeric formatting, so equal
/// runs produce byte-identical files.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> columns);

  void add_row(const std::vector<double>& values);
  void write(const std::string& path) const;

  static std::string format(double v);

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<double>> rows_;
};

}  // namespace torusflow
