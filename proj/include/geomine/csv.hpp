#pragma once

#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace geomine::csv {

/// RFC 4180-style record reader: quoted fields, doubled quotes, embedded
/// delimiters and newlines. Strips a UTF-8 BOM on the first record and a
/// trailing '\r'.
class Reader {
public:
    explicit Reader(std::istream& in, char delimiter = ',') : in_(in), delim_(delimiter) {}

    /// Returns false at end of input.
    bool next(std::vector<std::string>& fields);

    /// 1-based physical line number where the last record started.
    std::size_t line() const noexcept { return record_line_; }

private:
    std::istream& in_;
    char delim_;
    std::size_t line_ = 0;
    std::size_t record_line_ = 0;
    bool first_ = true;
};

/// Quotes a field only when needed.
std::string escape(std::string_view field, char delimiter = ',');

std::string_view trim(std::string_view s) noexcept;

} // namespace geomine::csv
