#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include <json.hpp>

#include "geomine/discovery.hpp"
#include "geomine/error.hpp"
#include "geomine/export.hpp"
#include "geomine/metrics.hpp"

namespace geomine {

/// Parameters shared by the CLI and the HTTP API.
///
/// Filters apply in a fixed order: time window, endpoints, aggregation or
/// projection, discovery, minimum edge frequency, distances, GeoJSON.
struct MapQuery {
    Dimension dimension = Dimension::city();
    std::optional<Level> level;
    /// Unset: false for the activity dimension, true otherwise.
    std::optional<bool> collapse;
    std::optional<std::string> source;
    std::optional<std::string> destination;
    std::optional<Instant> from;
    std::optional<Instant> to;
    std::size_t min_freq = 0;

    bool effective_collapse() const noexcept;

    /// Keys: dimension, level, collapse, source, destination, from, to,
    /// min_freq. Unknown keys are ignored. Throws ConfigError on bad values.
    static MapQuery from_params(const std::map<std::string, std::string>& params);
};

/// Thrown when a level is requested but the events can't be placed in the
/// gazetteer (or there is no gazetteer).
class UnresolvableLevel : public DataError {
public:
    using DataError::DataError;
};

struct MapResult {
    ProcessMap map;
    GeoJsonLayers layers;
    std::size_t traces_after_filters = 0;
    ValidationReport unresolved;
    std::vector<std::string> missing_distances;
};

/// The time window, then the endpoints filter, as the map pipeline applies them.
EventLog select_traces(const EventLog& log, const Gazetteer* gazetteer, const MapQuery& query, bool strict);

/// Runs the full filter/discovery chain. `gazetteer` may be null when no
/// level is requested; strict turns unresolved places into UnresolvableLevel.
MapResult run_map(const EventLog& log, const Gazetteer* gazetteer, const MapQuery& query, bool strict);

/// {"summary": {...}, "nodes": FeatureCollection, "edges": FeatureCollection}
nlohmann::ordered_json map_document(const MapResult& result, const MapQuery& query);

/// Assessed variants after the time and endpoint filters.
std::vector<PathAssessment> run_variants(const EventLog& log, const Gazetteer* gazetteer, const MapQuery& query,
                                         bool strict);
nlohmann::ordered_json variants_document(const std::vector<PathAssessment>& rows);

FrameSet run_frames(const EventLog& log, const Gazetteer* gazetteer, const MapQuery& query, std::int64_t bin_s,
                    bool strict);
/// Frames as window-stamped node/edge layer pairs, with distances annotated.
nlohmann::ordered_json frames_document(const FrameSet& frames);

} // namespace geomine
