#include "geomine/csv.hpp"

namespace geomine::csv {

bool Reader::next(std::vector<std::string>& fields) {
    fields.clear();
    std::string line;
    if (!std::getline(in_, line)) return false;
    ++line_;
    record_line_ = line_;
    if (first_) {
        first_ = false;
        if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    }

    std::string field;
    bool quoted = false;
    std::size_t i = 0;
    for (;;) {
        if (i >= line.size()) {
            if (quoted) {
                // quoted field spans a newline
                std::string more;
                if (!std::getline(in_, more)) break;
                ++line_;
                field.push_back('\n');
                line = std::move(more);
                i = 0;
                continue;
            }
            break;
        }
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == delim_) {
            fields.push_back(std::move(field));
            field.clear();
        } else if (c == '\r' && i + 1 == line.size()) {
            // CRLF
        } else {
            field.push_back(c);
        }
        ++i;
    }
    fields.push_back(std::move(field));
    return true;
}

std::string escape(std::string_view field, char delimiter) {
    bool needs = field.find_first_of("\"\r\n") != std::string_view::npos ||
                 field.find(delimiter) != std::string_view::npos;
    if (!needs) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string_view trim(std::string_view s) noexcept {
    const auto ws = " \t\r\n";
    auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

} // namespace geomine::csv
