#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "geomine/discovery.hpp"

namespace geomine {

struct AnnotateResult {
    ProcessMap map;
    /// "source -> target" for every edge left without a distance.
    std::vector<std::string> missing;
};

/// Sets distance_km on each edge: the observed transit length when the
/// transitions were located, otherwise the great-circle distance between the
/// node coordinates. Idempotent.
AnnotateResult annotate_distances(const ProcessMap& map);

enum class SpeedStatus { ok, no_distance, no_duration };

struct Speed {
    SpeedStatus status = SpeedStatus::ok;
    double kmh = 0.0; ///< meaningful only when status == ok

    explicit operator bool() const noexcept { return status == SpeedStatus::ok; }
};

/// distance_km / (mean duration in hours).
Speed speed(const DfgEdge& edge) noexcept;
Speed speed(double distance_km, double mean_duration_s) noexcept;

struct EdgeMetrics {
    double distance_km = 0.0;
    double mean_duration_s = 0.0;
    std::optional<double> speed_kmh;
    std::size_t frequency = 0;
};

std::optional<EdgeMetrics> edge_metrics(const DfgEdge& edge);

/// Minimal total distance; ties by higher case count, then path.
/// Throws DataError when no variant has a distance.
Variant optimal_path(const std::vector<Variant>& variants);

/// Descending case count; ties by shorter distance (unknown last), then path.
/// Throws ConfigError when k == 0.
std::vector<Variant> traffic_ranking(const std::vector<Variant>& variants, std::size_t k);

struct PathAssessment {
    Variant variant;
    std::optional<double> total_distance_km;
    double total_mean_duration_s = 0.0;
    std::size_t rank_by_distance = 0;
    std::size_t rank_by_traffic = 0;
};

/// Ranks are 1-based permutations over the input. Output keeps input order.
std::vector<PathAssessment> assess(const std::vector<Variant>& variants);
std::vector<PathAssessment> assess(const EventLog& log, const Dimension& dim);

nlohmann::ordered_json assessments_to_json(const std::vector<PathAssessment>& rows);
/// Header: path,case_count,total_distance_km,total_mean_duration_s,rank_by_distance,rank_by_traffic
std::string assessments_to_csv(const std::vector<PathAssessment>& rows);

} // namespace geomine
