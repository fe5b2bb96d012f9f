#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace geomine {

/// UTC instant, second precision.
using Instant = std::chrono::sys_seconds;

/// A day/month/year pattern such as "dd-MM-yyyy: HH.mm".
///
/// Tokens: yyyy, MM, dd, HH, mm, ss. Whitespace in the pattern matches zero
/// or more whitespace characters in the input, so "25-05-2017:14.01" and
/// "25-05-2017: 14.01" both parse under the pattern above. Everything else is
/// a literal. Values are interpreted as UTC.
class TimestampFormat {
public:
    explicit TimestampFormat(std::string_view pattern);

    std::optional<Instant> parse(std::string_view text) const;
    std::string format(Instant t) const;
    const std::string& pattern() const noexcept { return pattern_; }

private:
    enum class Kind { year, month, day, hour, minute, second, space, literal };
    struct Token {
        Kind kind;
        char ch = 0;
    };
    std::string pattern_;
    std::vector<Token> tokens_;
};

/// "yyyy-MM-dd", "yyyy-MM-ddTHH:mm:ss" or the same with a trailing 'Z'.
std::optional<Instant> parse_iso_instant(std::string_view text);
/// "yyyy-MM-ddTHH:mm:ssZ"
std::string format_iso(Instant t);

} // namespace geomine
