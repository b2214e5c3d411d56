#include "pvedge/csv.hpp"

#include "pvedge/errors.hpp"

namespace pvedge {

bool CsvReader::next(CsvRecord& out) {
  std::string raw;
  while (std::getline(in_, raw)) {
    ++line_;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    if (raw.empty()) continue;

    out.line = line_;
    out.fields.clear();
    std::string field;
    bool quoted = false;

    std::size_t i = 0;
    for (;;) {
      if (i >= raw.size()) {
        if (!quoted) break;
        // Quoted field continues past the line break.
        std::string more;
        if (!std::getline(in_, more)) {
          throw DataError("line " + std::to_string(out.line) +
                          ": unterminated quoted field");
        }
        ++line_;
        if (!more.empty() && more.back() == '\r') more.pop_back();
        field += '\n';
        raw = std::move(more);
        i = 0;
        continue;
      }
      const char c = raw[i];
      if (quoted) {
        if (c == '"') {
          if (i + 1 < raw.size() && raw[i + 1] == '"') {
            field += '"';
            i += 2;
          } else {
            quoted = false;
            ++i;
          }
        } else {
          field += c;
          ++i;
        }
      } else if (c == '"' && field.empty()) {
        quoted = true;
        ++i;
      } else if (c == ',') {
        out.fields.push_back(std::move(field));
        field.clear();
        ++i;
      } else {
        field += c;
        ++i;
      }
    }
    out.fields.push_back(std::move(field));
    return true;
  }
  return false;
}

std::string csv_field(std::string_view text) {
  const bool needs_quotes =
      text.find_first_of(",\"\n\r") != std::string_view::npos;
  if (!needs_quotes) return std::string(text);
  std::string out = "\"";
  for (const char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace pvedge
