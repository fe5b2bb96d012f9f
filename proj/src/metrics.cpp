#include "geomine/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "geomine/csv.hpp"
#include "geomine/error.hpp"

namespace geomine {

namespace {

std::string join_path(const std::vector<std::string>& path) {
    std::string out;
    for (std::size_t i = 0; i < path.size(); ++i) {
        if (i) out += " > ";
        out += path[i];
    }
    return out;
}

// Shortest distance first, unknown distances last.
bool distance_less(const std::optional<double>& a, const std::optional<double>& b) {
    if (a && b) return *a < *b;
    return a.has_value() && !b.has_value();
}

bool traffic_order(const Variant& a, const Variant& b) {
    if (a.case_count != b.case_count) return a.case_count > b.case_count;
    if (a.total_distance_km != b.total_distance_km) return distance_less(a.total_distance_km, b.total_distance_km);
    return a.path < b.path;
}

bool distance_order(const Variant& a, const Variant& b) {
    if (a.total_distance_km != b.total_distance_km) return distance_less(a.total_distance_km, b.total_distance_km);
    if (a.case_count != b.case_count) return a.case_count > b.case_count;
    return a.path < b.path;
}

std::string fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

} // namespace

AnnotateResult annotate_distances(const ProcessMap& map) {
    AnnotateResult result{map, {}};
    for (auto& e : result.map.edges) {
        if (e.transit_km) {
            e.distance_km = *e.transit_km;
            continue;
        }
        const auto* a = map.find_node(e.source);
        const auto* b = map.find_node(e.target);
        if (a && b && a->coord && b->coord) {
            e.distance_km = haversine_km(*a->coord, *b->coord);
        } else {
            e.distance_km.reset();
            result.missing.push_back(e.source + " -> " + e.target);
        }
    }
    if (std::find(map.provenance.begin(), map.provenance.end(), "annotate_distances") == map.provenance.end())
        result.map.provenance.push_back("annotate_distances");
    return result;
}

Speed speed(double distance_km, double mean_duration_s) noexcept {
    if (!std::isfinite(distance_km) || distance_km < 0) return {SpeedStatus::no_distance, 0.0};
    if (!(mean_duration_s > 0)) return {SpeedStatus::no_duration, 0.0};
    return {SpeedStatus::ok, distance_km / (mean_duration_s / 3600.0)};
}

Speed speed(const DfgEdge& edge) noexcept {
    if (!edge.distance_km) return {SpeedStatus::no_distance, 0.0};
    return speed(*edge.distance_km, edge.durations.mean_s);
}

std::optional<EdgeMetrics> edge_metrics(const DfgEdge& edge) {
    if (!edge.distance_km) return std::nullopt;
    EdgeMetrics m{*edge.distance_km, edge.durations.mean_s, std::nullopt, edge.frequency};
    if (auto s = speed(edge)) m.speed_kmh = s.kmh;
    return m;
}

Variant optimal_path(const std::vector<Variant>& variants) {
    const Variant* best = nullptr;
    for (const auto& v : variants) {
        if (!v.total_distance_km) continue;
        if (!best || distance_order(v, *best)) best = &v;
    }
    if (!best) throw DataError("no variant has a complete distance");
    return *best;
}

std::vector<Variant> traffic_ranking(const std::vector<Variant>& variants, std::size_t k) {
    if (k == 0) throw ConfigError("traffic ranking needs k >= 1");
    std::vector<Variant> out = variants;
    std::stable_sort(out.begin(), out.end(), traffic_order);
    if (out.size() > k) out.resize(k);
    return out;
}

std::vector<PathAssessment> assess(const std::vector<Variant>& variants) {
    std::vector<PathAssessment> out;
    out.reserve(variants.size());
    for (const auto& v : variants) out.push_back({v, v.total_distance_km, v.mean_duration_s, 0, 0});

    std::vector<std::size_t> idx(variants.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return distance_order(variants[a], variants[b]); });
    for (std::size_t r = 0; r < idx.size(); ++r) out[idx[r]].rank_by_distance = r + 1;

    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return traffic_order(variants[a], variants[b]); });
    for (std::size_t r = 0; r < idx.size(); ++r) out[idx[r]].rank_by_traffic = r + 1;
    return out;
}

std::vector<PathAssessment> assess(const EventLog& log, const Dimension& dim) {
    return assess(variants(log, dim));
}

nlohmann::ordered_json assessments_to_json(const std::vector<PathAssessment>& rows) {
    auto list = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
        list.push_back({{"path", r.variant.path},
                        {"case_count", r.variant.case_count},
                        {"total_distance_km", r.total_distance_km ? nlohmann::ordered_json(*r.total_distance_km)
                                                                  : nlohmann::ordered_json(nullptr)},
                        {"total_mean_duration_s", r.total_mean_duration_s},
                        {"rank_by_distance", r.rank_by_distance},
                        {"rank_by_traffic", r.rank_by_traffic}});
    }
    return list;
}

std::string assessments_to_csv(const std::vector<PathAssessment>& rows) {
    std::string out = "path,case_count,total_distance_km,total_mean_duration_s,rank_by_distance,rank_by_traffic\n";
    for (const auto& r : rows) {
        out += csv::escape(join_path(r.variant.path));
        out += ',' + std::to_string(r.variant.case_count);
        out += ',' + (r.total_distance_km ? fixed(*r.total_distance_km, 3) : std::string());
        out += ',' + fixed(std::round(r.total_mean_duration_s), 0);
        out += ',' + std::to_string(r.rank_by_distance);
        out += ',' + std::to_string(r.rank_by_traffic);
        out += '\n';
    }
    return out;
}

} // namespace geomine
