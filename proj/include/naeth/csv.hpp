#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <variant>
#include <vector>

namespace naeth {

using CsvField = std::variant<std::string, long long, double>;

/// Header row plus records; doubles are written with 17 significant digits.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::vector<std::string> header);
  void row(const std::vector<CsvField>& fields);

 private:
  std::ofstream out_;
  std::size_t columns_;
};

std::string format_double(double x);

}  // namespace naeth
