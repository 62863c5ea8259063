#include "common/csv.hpp"

#include <charconv>
#include <stdexcept>
#include <system_error>

namespace cjscope::csv {

void write_field(std::string& out, std::string_view field) {
    const bool quote = field.empty() || field.find_first_of(",\"\r\n") != std::string_view::npos;
    if (!quote) {
        out += field;
        return;
    }
    out += '"';
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
}

std::vector<Row> parse(std::string_view text) {
    std::vector<Row> rows;
    Row row;
    std::string field;
    bool quoted = false;
    bool field_started = false;
    auto end_row = [&] {
        row.push_back(std::move(field));
        field.clear();
        rows.push_back(std::move(row));
        row.clear();
        field_started = false;
    };
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c != '"') {
                field += c;
            } else if (i + 1 < text.size() && text[i + 1] == '"') {
                field += '"';
                ++i;
            } else {
                quoted = false;
            }
            continue;
        }
        switch (c) {
            case '"':
                if (field_started) throw std::invalid_argument("csv: stray quote inside unquoted field");
                quoted = true;
                field_started = true;
                break;
            case ',':
                row.push_back(std::move(field));
                field.clear();
                field_started = false;
                break;
            case '\r':
                if (i + 1 < text.size() && text[i + 1] == '\n') {
                    end_row();
                    ++i;
                } else {
                    field += c;
                    field_started = true;
                }
                break;
            case '\n':
                end_row();
                break;
            default:
                field += c;
                field_started = true;
        }
    }
    if (quoted) throw std::invalid_argument("csv: unterminated quoted field");
    if (field_started || !row.empty()) end_row();
    return rows;
}

double parse_double(std::string_view s, std::string_view where) {
    double v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size())
        throw std::invalid_argument("csv: " + std::string(where) + ": not a number: '" +
                                    std::string(s) + "'");
    return v;
}

}  // namespace cjscope::csv
