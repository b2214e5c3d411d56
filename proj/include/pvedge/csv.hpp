#pragma once

#include <cstddef>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace pvedge {

struct CsvRecord {
  std::size_t line = 0;  ///< 1-based line the record starts on
  std::vector<std::string> fields;
};

/// RFC-4180-style reader: comma separation, double-quote quoting with ""
/// escapes, quoted fields may span lines. Blank lines are skipped.
class CsvReader {
public:
  explicit CsvReader(std::istream& in) : in_(in) {}

  /// Reads one record. Returns false at end of input; throws DataError
  /// (with line number) on malformed quoting.
  bool next(CsvRecord& out);

private:
  std::istream& in_;
  std::size_t line_ = 0;
};

/// Quotes a field only when it needs it.
std::string csv_field(std::string_view text);

}  // namespace pvedge
