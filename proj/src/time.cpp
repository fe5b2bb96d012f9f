#include "geomine/time.hpp"

#include <cctype>
#include <cstdio>

#include "geomine/error.hpp"

namespace geomine {

using namespace std::chrono;

TimestampFormat::TimestampFormat(std::string_view pattern) : pattern_(pattern) {
    std::size_t i = 0;
    auto starts = [&](std::string_view tok) { return pattern.substr(i, tok.size()) == tok; };
    bool seen_year = false, seen_month = false, seen_day = false;
    while (i < pattern.size()) {
        if (starts("yyyy")) {
            tokens_.push_back({Kind::year});
            seen_year = true;
            i += 4;
        } else if (starts("MM")) {
            tokens_.push_back({Kind::month});
            seen_month = true;
            i += 2;
        } else if (starts("dd")) {
            tokens_.push_back({Kind::day});
            seen_day = true;
            i += 2;
        } else if (starts("HH")) {
            tokens_.push_back({Kind::hour});
            i += 2;
        } else if (starts("mm")) {
            tokens_.push_back({Kind::minute});
            i += 2;
        } else if (starts("ss")) {
            tokens_.push_back({Kind::second});
            i += 2;
        } else if (std::isspace(static_cast<unsigned char>(pattern[i]))) {
            if (tokens_.empty() || tokens_.back().kind != Kind::space) tokens_.push_back({Kind::space});
            ++i;
        } else {
            tokens_.push_back({Kind::literal, pattern[i]});
            ++i;
        }
    }
    if (!seen_year || !seen_month || !seen_day)
        throw ConfigError("timestamp format '" + pattern_ + "' needs yyyy, MM and dd");
}

std::optional<Instant> TimestampFormat::parse(std::string_view text) const {
    int year = 0, month = 0, day = 0, hour = 0, minute = 0, second = 0;
    std::size_t pos = 0;
    auto skip_ws = [&] {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    };
    auto number = [&](int min_digits, int max_digits, int& out) {
        int n = 0, v = 0;
        while (pos < text.size() && n < max_digits && std::isdigit(static_cast<unsigned char>(text[pos]))) {
            v = v * 10 + (text[pos] - '0');
            ++pos;
            ++n;
        }
        out = v;
        return n >= min_digits;
    };
    skip_ws();
    for (const auto& tok : tokens_) {
        bool ok = true;
        switch (tok.kind) {
        case Kind::year: ok = number(4, 4, year); break;
        case Kind::month: ok = number(1, 2, month); break;
        case Kind::day: ok = number(1, 2, day); break;
        case Kind::hour: ok = number(1, 2, hour); break;
        case Kind::minute: ok = number(1, 2, minute); break;
        case Kind::second: ok = number(1, 2, second); break;
        case Kind::space: skip_ws(); break;
        case Kind::literal:
            ok = pos < text.size() && text[pos] == tok.ch;
            ++pos;
            break;
        }
        if (!ok) return std::nullopt;
    }
    skip_ws();
    if (pos != text.size()) return std::nullopt;
    if (hour > 23 || minute > 59 || second > 59) return std::nullopt;
    year_month_day ymd{std::chrono::year{year}, std::chrono::month{static_cast<unsigned>(month)},
                       std::chrono::day{static_cast<unsigned>(day)}};
    if (!ymd.ok()) return std::nullopt;
    return sys_days{ymd} + hours{hour} + minutes{minute} + seconds{second};
}

std::string TimestampFormat::format(Instant t) const {
    const auto day_point = floor<days>(t);
    const year_month_day ymd{day_point};
    const hh_mm_ss hms{t - day_point};
    std::string out;
    char buf[16];
    for (const auto& tok : tokens_) {
        switch (tok.kind) {
        case Kind::year:
            std::snprintf(buf, sizeof buf, "%04d", static_cast<int>(ymd.year()));
            out += buf;
            break;
        case Kind::month:
            std::snprintf(buf, sizeof buf, "%02u", static_cast<unsigned>(ymd.month()));
            out += buf;
            break;
        case Kind::day:
            std::snprintf(buf, sizeof buf, "%02u", static_cast<unsigned>(ymd.day()));
            out += buf;
            break;
        case Kind::hour:
            std::snprintf(buf, sizeof buf, "%02d", static_cast<int>(hms.hours().count()));
            out += buf;
            break;
        case Kind::minute:
            std::snprintf(buf, sizeof buf, "%02d", static_cast<int>(hms.minutes().count()));
            out += buf;
            break;
        case Kind::second:
            std::snprintf(buf, sizeof buf, "%02d", static_cast<int>(hms.seconds().count()));
            out += buf;
            break;
        case Kind::space: out.push_back(' '); break;
        case Kind::literal: out.push_back(tok.ch); break;
        }
    }
    return out;
}

std::optional<Instant> parse_iso_instant(std::string_view text) {
    if (!text.empty() && (text.back() == 'Z' || text.back() == 'z')) text.remove_suffix(1);
    if (text.size() == 10) return TimestampFormat("yyyy-MM-dd").parse(text);
    return TimestampFormat("yyyy-MM-ddTHH:mm:ss").parse(text);
}

std::string format_iso(Instant t) {
    return TimestampFormat("yyyy-MM-ddTHH:mm:ss").format(t) + "Z";
}

} // namespace geomine
