#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "geomine/eventlog.hpp"
#include "geomine/geo.hpp"

namespace geomine {

/// Activity labels emitted by the generator (reference parcel log wording).
namespace activity {
inline constexpr std::string_view pickup = "Parcel pickup";
inline constexpr std::string_view check_in = "Parcel check in";
inline constexpr std::string_view check_out = "Parcel check-out";
inline constexpr std::string_view delivery = "Parcel Delivery";
} // namespace activity

struct RouteSpec {
    std::vector<std::string> stops; ///< place names, in travel order (>= 2)
    double weight = 1.0;
};

struct DurationSpec {
    double mean_s = 6 * 3600.0;
    double jitter_s = 0.0;
};

/// A parcel network. Stops name city-level places; a stop's office (the
/// resource on its events) is the first office-level place whose parent is
/// that city, or "P.O. <city>" when there is none.
struct NetworkConfig {
    std::vector<Gazetteer::Row> places;
    std::vector<RouteSpec> routes;
    std::size_t cases = 0;
    std::uint64_t seed = 0;
    Instant time_origin{};
    /// Spacing between consecutive case start times.
    std::int64_t case_interval_s = 600;
    /// Gap between any two consecutive events of a case.
    DurationSpec inter_hop_duration;

    /// Throws ConfigError when routes are empty, stops are unknown, weights
    /// are not positive, or the places don't form a valid gazetteer.
    void validate() const;
    Gazetteer gazetteer() const;
    /// Expected events per case: sum_i w_i (2 n_i + 1) / sum_i w_i.
    double expected_events_per_case() const;

    static NetworkConfig from_json(const nlohmann::json& doc);
    nlohmann::json to_json() const;
};

NetworkConfig load_network_config(const std::filesystem::path& path);

/// Draws a route per case by weight (mt19937_64) and emits the reference parcel event
/// pattern: pickup and check-out at the origin, check-in and check-out at
/// every later stop, then delivery at the destination. Timestamps are whole
/// minutes, strictly increasing within a case. Locations come from the
/// places; the schema is the default SchemaMapping.
EventLog generate(const NetworkConfig& config);

/// A copy of `base` with `cases` chosen so the expected event count is as
/// close as possible to `events_target`. Throws ConfigError on target 0.
NetworkConfig scale_config_to_target(NetworkConfig base, std::size_t events_target);

/// The built-in benchmark network (31 cities, 20 routes) scaled to the target.
NetworkConfig scale_benchmark_config(std::size_t events_target);

/// The built-in benchmark network with `cases` unset.
NetworkConfig benchmark_network();

} // namespace geomine
