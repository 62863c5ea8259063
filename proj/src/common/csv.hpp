#pragma once

#include <string>
#include <string_view>
#include <vector>

// Minimal RFC 4180 reader/writer shared by the CSV-producing modules.

namespace cjscope::csv {

using Row = std::vector<std::string>;

/// Accepts LF or CRLF record endings. Throws std::invalid_argument on an
/// unterminated quote or a quote inside an unquoted field.
std::vector<Row> parse(std::string_view text);

/// Appends one field, quoting only when needed (empty, comma, quote, CR, LF).
void write_field(std::string& out, std::string_view field);

/// Whole-string decimal parse; throws std::invalid_argument naming `where`.
double parse_double(std::string_view s, std::string_view where);

}  // namespace cjscope::csv
