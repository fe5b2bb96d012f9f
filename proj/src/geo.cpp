#include "geomine/geo.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "geomine/csv.hpp"
#include "geomine/error.hpp"

namespace geomine {

namespace {

std::optional<double> parse_double(std::string_view s) {
    s = csv::trim(s);
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

constexpr double deg2rad(double d) noexcept { return d * std::numbers::pi / 180.0; }

} // namespace

bool Coordinate::valid(double lat, double lon) noexcept {
    return std::isfinite(lat) && std::isfinite(lon) && lat >= -90.0 && lat <= 90.0 &&
           lon >= -180.0 && lon <= 180.0;
}

Coordinate Coordinate::make(double lat, double lon) {
    if (!valid(lat, lon)) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "coordinate out of range: lat=%g lon=%g", lat, lon);
        throw ConfigError(buf);
    }
    return Coordinate{lat, lon};
}

std::optional<Coordinate> parse_lat_lon(std::string_view text) {
    auto comma = text.find(',');
    if (comma == std::string_view::npos) return std::nullopt;
    auto lat = parse_double(text.substr(0, comma));
    auto lon = parse_double(text.substr(comma + 1));
    if (!lat || !lon || !Coordinate::valid(*lat, *lon)) return std::nullopt;
    return Coordinate{*lat, *lon};
}

std::string format_lat_lon(const Coordinate& c) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.8f,%.8f", c.lat, c.lon);
    return buf;
}

double haversine_km(const Coordinate& a, const Coordinate& b) noexcept {
    const double phi1 = deg2rad(a.lat);
    const double phi2 = deg2rad(b.lat);
    const double s_lat = std::sin((phi2 - phi1) / 2.0);
    const double s_lon = std::sin(deg2rad(b.lon - a.lon) / 2.0);
    double h = s_lat * s_lat + std::cos(phi1) * std::cos(phi2) * s_lon * s_lon;
    h = std::clamp(h, 0.0, 1.0);
    return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(h));
}

std::string_view to_string(Level level) noexcept {
    switch (level) {
    case Level::office: return "office";
    case Level::city: return "city";
    case Level::province: return "province";
    case Level::country: return "country";
    }
    return "?";
}

std::optional<Level> parse_level(std::string_view text) noexcept {
    if (text == "office") return Level::office;
    if (text == "city") return Level::city;
    if (text == "province") return Level::province;
    if (text == "country") return Level::country;
    return std::nullopt;
}

Gazetteer Gazetteer::build(const std::vector<Row>& rows) {
    Gazetteer g;
    g.places_.reserve(rows.size());
    for (const auto& row : rows) {
        PlaceId id = g.places_.size();
        auto [it, inserted] = g.index_.try_emplace({row.name, row.level}, id);
        if (!inserted) {
            throw HierarchyError("duplicate place '" + row.name + "' at level " +
                                 std::string(to_string(row.level)));
        }
        g.places_.push_back(Place{id, row.name, row.level, std::nullopt, row.coord});
    }

    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& row = rows[i];
        auto& place = g.places_[i];
        // Partial hierarchies are allowed: a parentless city is a root.
        if (row.parent.empty()) continue;
        if (row.level == Level::country) {
            throw HierarchyError("country '" + row.name + "' must not have a parent");
        }
        std::optional<PlaceId> parent;
        for (int l = static_cast<int>(row.level) + 1; l <= static_cast<int>(Level::country); ++l) {
            if (auto* p = g.find(row.parent, static_cast<Level>(l))) {
                parent = p->id;
                break;
            }
        }
        if (!parent) {
            for (int l = 0; l <= static_cast<int>(row.level); ++l) {
                if (g.find(row.parent, static_cast<Level>(l))) {
                    throw HierarchyError("level inversion: parent '" + row.parent + "' of '" +
                                         row.name + "' is not coarser than " +
                                         std::string(to_string(row.level)));
                }
            }
            throw HierarchyError("dangling parent '" + row.parent + "' for '" + row.name + "'");
        }
        place.parent = parent;
    }
    return g;
}

const Place& Gazetteer::at(PlaceId id) const {
    if (id >= places_.size()) throw HierarchyError("unknown place id " + std::to_string(id));
    return places_[id];
}

const Place* Gazetteer::find(std::string_view name, Level level) const noexcept {
    auto it = index_.find(std::pair<std::string, Level>(std::string(name), level));
    return it == index_.end() ? nullptr : &places_[it->second];
}

const Place& Gazetteer::ancestor_at_level(PlaceId id, Level level) const {
    const Place* p = &at(id);
    if (level < p->level) {
        throw HierarchyError("requested level " + std::string(to_string(level)) +
                             " is finer than source level " + std::string(to_string(p->level)) +
                             " of '" + p->name + "'");
    }
    while (p->level != level) {
        if (!p->parent) {
            throw HierarchyError("no " + std::string(to_string(level)) + " ancestor for '" +
                                 places_[id].name + "'");
        }
        p = &places_[*p->parent];
        if (p->level > level) {
            throw HierarchyError("no " + std::string(to_string(level)) + " ancestor for '" +
                                 places_[id].name + "'");
        }
    }
    return *p;
}

Gazetteer read_gazetteer(std::istream& in) {
    csv::Reader reader(in);
    std::vector<std::string> fields;
    if (!reader.next(fields)) return {};

    auto col = [&](std::string_view name) -> std::size_t {
        for (std::size_t i = 0; i < fields.size(); ++i)
            if (csv::trim(fields[i]) == name) return i;
        throw SchemaError("gazetteer header lacks column '" + std::string(name) + "'");
    };
    const std::size_t c_name = col("name"), c_level = col("level"), c_parent = col("parent"),
                      c_lat = col("lat"), c_lon = col("lon");
    const std::size_t width = std::max({c_name, c_level, c_parent, c_lat, c_lon}) + 1;

    std::vector<Gazetteer::Row> rows;
    while (reader.next(fields)) {
        if (fields.size() == 1 && csv::trim(fields[0]).empty()) continue;
        const auto where = " (gazetteer line " + std::to_string(reader.line()) + ")";
        if (fields.size() < width) throw SchemaError("short row" + where);
        Gazetteer::Row row;
        row.name = std::string(csv::trim(fields[c_name]));
        auto level = parse_level(csv::trim(fields[c_level]));
        if (!level) throw SchemaError("unknown level '" + fields[c_level] + "'" + where);
        row.level = *level;
        row.parent = std::string(csv::trim(fields[c_parent]));
        if (row.parent == "-" || row.parent == "\xE2\x80\x94") row.parent.clear();
        auto lat = parse_double(fields[c_lat]);
        auto lon = parse_double(fields[c_lon]);
        if (!lat || !lon || !Coordinate::valid(*lat, *lon))
            throw SchemaError("invalid coordinate" + where);
        row.coord = Coordinate{*lat, *lon};
        rows.push_back(std::move(row));
    }
    return Gazetteer::build(rows);
}

Gazetteer load_gazetteer(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open gazetteer " + path.string());
    return read_gazetteer(in);
}

} // namespace geomine
