#include "geomine/export.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "geomine/error.hpp"
#include "geomine/metrics.hpp"
#include "geomine/stable_json.hpp"

namespace geomine {

using ojson = nlohmann::ordered_json;

namespace {

ojson position(const Coordinate& c) { return ojson::array({c.lon, c.lat}); }

ojson opt_number(const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); }

void check_position(const ojson& p, const std::string& where) {
    if (!p.is_array() || p.size() < 2 || p.size() > 3)
        throw ConfigError(where + ": position must be [lon, lat] or [lon, lat, alt]");
    for (const auto& v : p)
        if (!v.is_number()) throw ConfigError(where + ": non-numeric position");
    const double lon = p[0].get<double>();
    const double lat = p[1].get<double>();
    if (!Coordinate::valid(lat, lon))
        throw ConfigError(where + ": position out of range (lon " + std::to_string(lon) + ", lat " +
                          std::to_string(lat) + ")");
}

void check_line(const ojson& line, const std::string& where) {
    if (!line.is_array() || line.size() < 2) throw ConfigError(where + ": LineString needs at least two positions");
    for (const auto& p : line) check_position(p, where);
}

} // namespace

std::string_view to_string(LayerKind kind) noexcept {
    switch (kind) {
    case LayerKind::events_nodes: return "events_nodes";
    case LayerKind::events_edges: return "events_edges";
    case LayerKind::evidence: return "evidence";
    }
    return "?";
}

ojson LayerDoc::to_document() const {
    ojson doc;
    doc["type"] = "FeatureCollection";
    doc["name"] = name;
    doc["kind"] = geomine::to_string(kind);
    doc["features"] = features;
    return doc;
}

std::string LayerDoc::to_string() const { return dump_stable(to_document()); }

double width_hint(std::size_t frequency, std::size_t min_frequency, std::size_t max_frequency) noexcept {
    if (max_frequency <= min_frequency) return 5.0;
    return 1.0 + 9.0 * static_cast<double>(frequency - min_frequency) /
                     static_cast<double>(max_frequency - min_frequency);
}

GeoJsonLayers to_geojson(const ProcessMap& map) {
    GeoJsonLayers out;
    out.nodes.name = "events_nodes";
    out.nodes.kind = LayerKind::events_nodes;
    out.edges.name = "events_edges";
    out.edges.kind = LayerKind::events_edges;

    for (const auto& n : map.nodes) {
        if (!n.coord) {
            out.skipped.push_back("node " + n.label);
            continue;
        }
        ojson f;
        f["type"] = "Feature";
        f["geometry"] = {{"type", "Point"}, {"coordinates", position(*n.coord)}};
        f["properties"] = {{"layer", out.nodes.name},
                           {"label", n.label},
                           {"visit_count", n.visit_count},
                           {"case_count", n.case_count}};
        out.nodes.features.push_back(std::move(f));
    }

    std::size_t lo = SIZE_MAX, hi = 0;
    for (const auto& e : map.edges) {
        lo = std::min(lo, e.frequency);
        hi = std::max(hi, e.frequency);
    }
    for (const auto& e : map.edges) {
        const auto* a = map.find_node(e.source);
        const auto* b = map.find_node(e.target);
        if (!a || !b || !a->coord || !b->coord) {
            out.skipped.push_back("edge " + e.source + " -> " + e.target);
            continue;
        }
        const auto s = speed(e);
        ojson f;
        f["type"] = "Feature";
        if (e.self_loop()) {
            f["geometry"] = {{"type", "Point"}, {"coordinates", position(*a->coord)}};
        } else {
            f["geometry"] = {{"type", "LineString"},
                             {"coordinates", ojson::array({position(*a->coord), position(*b->coord)})}};
        }
        f["properties"] = {{"layer", out.edges.name},
                           {"source", e.source},
                           {"target", e.target},
                           {"frequency", e.frequency},
                           {"case_frequency", e.case_frequency},
                           {"mean_duration_s", e.durations.mean_s},
                           {"median_duration_s", e.durations.median_s},
                           {"distance_km", opt_number(e.distance_km)},
                           {"speed_kmh", s ? ojson(s.kmh) : ojson(nullptr)},
                           {"width_hint", width_hint(e.frequency, lo, hi)},
                           {"self_loop", e.self_loop()}};
        out.edges.features.push_back(std::move(f));
    }
    return out;
}

std::string dot_quote(std::string_view id) {
    std::string out = "\"";
    for (char c : id) {
        switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\r': break;
        default: out.push_back(c);
        }
    }
    out.push_back('"');
    return out;
}

std::string to_dot(const ProcessMap& map) {
    std::string out = "digraph process_map {\n  rankdir=LR;\n";
    for (const auto& n : map.nodes) {
        out += "  " + dot_quote(n.label) + " [label=" + dot_quote(n.label) +
               ", visits=" + std::to_string(n.visit_count) + ", cases=" + std::to_string(n.case_count) + "];\n";
    }
    char mean[32];
    for (const auto& e : map.edges) {
        std::snprintf(mean, sizeof mean, "%.0f", std::round(e.durations.mean_s));
        out += "  " + dot_quote(e.source) + " -> " + dot_quote(e.target) + " [label=" +
               dot_quote(std::to_string(e.frequency) + " / " + mean + "s") +
               ", frequency=" + std::to_string(e.frequency) + "];\n";
    }
    out += "}\n";
    return out;
}

FrameSet dynamic_frames(const EventLog& log, const Labeling& labeling, bool collapse_repeats,
                        std::int64_t bin_width_s) {
    if (bin_width_s <= 0) throw ConfigError("bin width must be positive");
    FrameSet set;
    set.bin_width_s = bin_width_s;
    if (log.empty()) return set;

    Instant lo = Instant::max(), hi = Instant::min();
    for (const auto& t : log.traces()) {
        lo = std::min(lo, t.events.front().timestamp);
        hi = std::max(hi, t.events.front().timestamp);
    }
    const auto span = (hi - lo).count();
    const auto count = static_cast<std::size_t>(span / bin_width_s) + 1;
    constexpr std::size_t kMaxFrames = 100000;
    if (count > kMaxFrames)
        throw ConfigError("bin width yields " + std::to_string(count) + " frames (limit " +
                          std::to_string(kMaxFrames) + ")");

    std::vector<std::vector<Trace>> buckets(count);
    for (const auto& t : log.traces()) {
        const auto i = static_cast<std::size_t>((t.events.front().timestamp - lo).count() / bin_width_s);
        buckets[i].push_back(t);
    }
    set.frames.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const Instant start = lo + std::chrono::seconds(static_cast<std::int64_t>(i) * bin_width_s);
        const TimeWindow window{start, start + std::chrono::seconds(bin_width_s)};
        auto map = discover(log.with_traces(std::move(buckets[i])), labeling, collapse_repeats);
        map.provenance.insert(map.provenance.begin(),
                              "filter_time(" + format_iso(window.start) + ", " + format_iso(window.end) + ")");
        set.frames.push_back({window, std::move(map)});
    }
    return set;
}

FrameSet dynamic_frames(const EventLog& log, const Dimension& dim, std::int64_t bin_width_s) {
    return dynamic_frames(log, Labeling::by_dimension(log, dim), true, bin_width_s);
}

LayerDoc parse_evidence_layer(const ojson& doc, std::string name) {
    if (!doc.is_object() || doc.value("type", "") != "FeatureCollection")
        throw ConfigError("layer '" + name + "': root must be a FeatureCollection");
    if (!doc.contains("features") || !doc["features"].is_array())
        throw ConfigError("layer '" + name + "': missing features array");

    LayerDoc layer;
    layer.name = std::move(name);
    layer.kind = LayerKind::evidence;
    std::size_t i = 0;
    for (const auto& f : doc["features"]) {
        const std::string where = "layer '" + layer.name + "' feature " + std::to_string(i++);
        if (!f.is_object() || f.value("type", "") != "Feature") throw ConfigError(where + ": not a Feature");
        if (!f.contains("geometry") || !f["geometry"].is_object()) throw ConfigError(where + ": missing geometry");
        const auto& g = f["geometry"];
        const std::string type = g.value("type", "");
        if (!g.contains("coordinates")) throw ConfigError(where + ": geometry without coordinates");
        const auto& c = g["coordinates"];
        if (type == "Point") {
            check_position(c, where);
        } else if (type == "LineString") {
            check_line(c, where);
        } else if (type == "MultiLineString") {
            if (!c.is_array()) throw ConfigError(where + ": MultiLineString coordinates must be an array");
            for (const auto& line : c) check_line(line, where);
        } else {
            throw ConfigError(where + ": unsupported geometry type '" + type + "'");
        }
        ojson out;
        out["type"] = "Feature";
        out["geometry"] = {{"type", type}, {"coordinates", c}};
        ojson props = f.contains("properties") && f["properties"].is_object() ? f["properties"] : ojson::object();
        props["layer"] = layer.name;
        out["properties"] = std::move(props);
        layer.features.push_back(std::move(out));
    }
    return layer;
}

LayerDoc load_evidence_layer(const std::filesystem::path& path, std::string name) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open layer " + path.string());
    ojson doc;
    try {
        doc = ojson::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("layer '" + name + "': malformed GeoJSON: " + e.what());
    }
    return parse_evidence_layer(doc, std::move(name));
}

} // namespace geomine
