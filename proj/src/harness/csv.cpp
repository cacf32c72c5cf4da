#include "naeth/csv.hpp"

#include <fmt/format.h>

#include "naeth/errors.hpp"

namespace naeth {

std::string format_double(double x) { return fmt::format("{:.17g}", x); }

CsvWriter::CsvWriter(const std::filesystem::path& path, std::vector<std::string> header)
    : columns_(header.size()) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  out_.open(path);
  if (!out_) throw InvalidArgument("cannot write '" + path.string() + "'");
  for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
  out_ << '\n';
}

void CsvWriter::row(const std::vector<CsvField>& fields) {
  if (fields.size() != columns_) throw std::logic_error("CsvWriter: wrong number of fields");
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out_ << ',';
    std::visit(
        [&](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, double>)
            out_ << format_double(v);
          else
            out_ << v;
        },
        fields[i]);
  }
  out_ << '\n';
  if (!out_) throw ResourceError("write failed");
}

}  // namespace naeth
