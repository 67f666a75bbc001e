#pragma once

#include <fstream>
#include <string>
#include <vector>

namespace sml {

/// Shortest round-trippable decimal form of a double ("%.17g"); every number
/// written to an artifact goes through this so identical runs are
/// byte-identical.
std::string fmt_g17(double x);

class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path);
  void header(const std::vector<std::string>& cols);
  void row(const std::vector<std::string>& cells);

 private:
  std::ofstream out_;
};

}  // namespace sml
