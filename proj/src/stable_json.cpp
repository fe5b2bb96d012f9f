#include "geomine/stable_json.hpp"

#include <cmath>
#include <cstdio>
#include <string_view>

namespace geomine {

namespace {

enum class Precision { coordinate, seconds, standard };

Precision precision_for(std::string_view key, Precision inherited) {
    if (key == "coordinates" || key == "lat" || key == "lon") return Precision::coordinate;
    if (key.size() >= 2 && key.substr(key.size() - 2) == "_s") return Precision::seconds;
    if (inherited == Precision::coordinate) return inherited;
    return Precision::standard;
}

void write_float(std::string& out, double v, Precision p) {
    if (!std::isfinite(v)) {
        out += "null";
        return;
    }
    char buf[64];
    switch (p) {
    case Precision::coordinate: std::snprintf(buf, sizeof buf, "%.8f", v); break;
    case Precision::seconds: std::snprintf(buf, sizeof buf, "%.0f", std::round(v)); break;
    case Precision::standard: std::snprintf(buf, sizeof buf, "%.3f", v); break;
    }
    // "-0.000" and friends
    std::string_view s(buf);
    if (s.front() == '-' && s.find_first_not_of("-0.") == std::string_view::npos) s.remove_prefix(1);
    out += s;
}

void write(std::string& out, const nlohmann::ordered_json& j, Precision p) {
    using value_t = nlohmann::ordered_json::value_t;
    switch (j.type()) {
    case value_t::object: {
        out.push_back('{');
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (!first) out.push_back(',');
            first = false;
            out += nlohmann::ordered_json(it.key()).dump();
            out.push_back(':');
            write(out, it.value(), precision_for(it.key(), p == Precision::coordinate ? p : Precision::standard));
        }
        out.push_back('}');
        break;
    }
    case value_t::array: {
        out.push_back('[');
        bool first = true;
        for (const auto& v : j) {
            if (!first) out.push_back(',');
            first = false;
            write(out, v, p);
        }
        out.push_back(']');
        break;
    }
    case value_t::number_float: write_float(out, j.get<double>(), p); break;
    default: out += j.dump(-1, ' ', false, nlohmann::ordered_json::error_handler_t::replace); break;
    }
}

} // namespace

std::string dump_stable(const nlohmann::ordered_json& doc) {
    std::string out;
    write(out, doc, Precision::standard);
    return out;
}

} // namespace geomine
