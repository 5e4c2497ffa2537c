#pragma once

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace coordnet::csv {

/// Minimal RFC 4180 reader: comma separated, double-quote escaping,
/// quoted fields may span lines. Tracks the 1-based line where each
/// record starts for error reporting.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  /// Next record, or nullopt at end of input. Blank lines are skipped.
  std::optional<std::vector<std::string>> next();
  std::size_t record_line() const noexcept { return record_line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 0;
  std::size_t record_line_ = 0;
};

/// Quote a field only when it contains a delimiter, quote or newline.
std::string escape(std::string_view field);

void write_row(std::ostream& out, const std::vector<std::string>& fields);

/// Shortest round-trip decimal representation of a double.
std::string format_double(double v);

}  // namespace coordnet::csv
