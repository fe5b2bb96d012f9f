#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "geomine/discovery.hpp"

namespace geomine {

enum class LayerKind { events_nodes, events_edges, evidence };

std::string_view to_string(LayerKind kind) noexcept;

/// A named GeoJSON FeatureCollection. Positions are longitude-first; every
/// feature carries a "layer" property equal to the layer name.
struct LayerDoc {
    std::string name;
    LayerKind kind = LayerKind::evidence;
    nlohmann::ordered_json features = nlohmann::ordered_json::array();

    /// {"type":"FeatureCollection","name":...,"kind":...,"features":[...]}
    nlohmann::ordered_json to_document() const;
    std::string to_string() const;
};

struct GeoJsonLayers {
    LayerDoc nodes;
    LayerDoc edges;
    /// Nodes without coordinates and edges touching them.
    std::vector<std::string> skipped;
};

/// 1 + 9 * (f - min) / (max - min); 5 when every frequency is equal.
double width_hint(std::size_t frequency, std::size_t min_frequency, std::size_t max_frequency) noexcept;

/// Nodes become Points; edges become two-position LineStrings, except
/// self-loops, which are Points at the node flagged "self_loop": true.
GeoJsonLayers to_geojson(const ProcessMap& map);

/// DOT digraph, nodes and edges in lexicographic order, edges labeled
/// "<frequency> / <mean duration>".
std::string to_dot(const ProcessMap& map);

/// Quotes and escapes a DOT identifier.
std::string dot_quote(std::string_view id);

struct Frame {
    TimeWindow window;
    ProcessMap map;
};

struct FrameSet {
    std::int64_t bin_width_s = 0;
    std::vector<Frame> frames;
};

/// Contiguous windows of bin_width_s starting at the earliest first-event
/// timestamp, enough to cover the latest; discover() over each window's
/// traces. An empty log gives an empty set. Throws ConfigError when
/// bin_width_s <= 0.
FrameSet dynamic_frames(const EventLog& log, const Labeling& labeling, bool collapse_repeats,
                        std::int64_t bin_width_s);
FrameSet dynamic_frames(const EventLog& log, const Dimension& dim, std::int64_t bin_width_s);

/// Validates a FeatureCollection of Point/LineString/MultiLineString
/// features with in-range positions and tags it as an evidence layer.
/// Throws ConfigError on any violation.
LayerDoc parse_evidence_layer(const nlohmann::ordered_json& doc, std::string name);
LayerDoc load_evidence_layer(const std::filesystem::path& path, std::string name);

} // namespace geomine
