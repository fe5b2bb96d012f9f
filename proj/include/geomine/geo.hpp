#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace geomine {

inline constexpr double kEarthRadiusKm = 6371.0;

/// WGS84 position in decimal degrees. Construct through make() to get range checks.
struct Coordinate {
    double lat = 0.0;
    double lon = 0.0;

    /// Throws ConfigError when a value is non-finite or out of range.
    static Coordinate make(double lat, double lon);
    static bool valid(double lat, double lon) noexcept;

    friend bool operator==(const Coordinate&, const Coordinate&) = default;
};

/// Parses "lat,lon" (Table-1 style). Returns nullopt on syntax or range errors.
std::optional<Coordinate> parse_lat_lon(std::string_view text);
std::string format_lat_lon(const Coordinate& c);

/// Great-circle distance on a sphere of radius kEarthRadiusKm.
double haversine_km(const Coordinate& a, const Coordinate& b) noexcept;

enum class Level : std::uint8_t { office = 0, city = 1, province = 2, country = 3 };

std::string_view to_string(Level level) noexcept;
std::optional<Level> parse_level(std::string_view text) noexcept;

using PlaceId = std::size_t;

struct Place {
    PlaceId id = 0;
    std::string name;
    Level level = Level::city;
    std::optional<PlaceId> parent;
    Coordinate coord;
};

/// Immutable office -> city -> province -> country hierarchy with a (name, level) index.
class Gazetteer {
public:
    Gazetteer() = default;

    /// Validates the hierarchy: unique (name, level), resolvable parents,
    /// parents strictly coarser, countries parentless.
    /// Rows reference parents by name; the parent is looked up at the
    /// nearest coarser level that has a place with that name.
    struct Row {
        std::string name;
        Level level = Level::city;
        std::string parent;
        Coordinate coord;
    };
    static Gazetteer build(const std::vector<Row>& rows);

    const std::vector<Place>& places() const noexcept { return places_; }
    bool empty() const noexcept { return places_.empty(); }
    std::size_t size() const noexcept { return places_.size(); }

    const Place& at(PlaceId id) const;
    const Place* find(std::string_view name, Level level) const noexcept;

    /// The ancestor of `id` at `level` (the place itself when levels match).
    /// Throws HierarchyError if `level` is finer than the place's level or the chain breaks.
    const Place& ancestor_at_level(PlaceId id, Level level) const;

private:
    std::vector<Place> places_;
    std::map<std::pair<std::string, Level>, PlaceId, std::less<>> index_;
};

/// CSV with header name,level,parent,lat,lon.
Gazetteer load_gazetteer(const std::filesystem::path& path);
Gazetteer read_gazetteer(std::istream& in);

} // namespace geomine
