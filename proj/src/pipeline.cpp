#include "geomine/pipeline.hpp"

#include <charconv>

#include "geomine/error.hpp"

namespace geomine {

using ojson = nlohmann::ordered_json;

namespace {

ojson opt_string(const std::optional<std::string>& v) { return v ? ojson(*v) : ojson(nullptr); }
ojson opt_instant(const std::optional<Instant>& v) { return v ? ojson(format_iso(*v)) : ojson(nullptr); }

std::size_t parse_count(const std::string& key, const std::string& text) {
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size())
        throw ConfigError(key + " must be a non-negative integer");
    return v;
}

EventLog apply_time(const EventLog& log, const MapQuery& q) {
    if (!q.from && !q.to) return log;
    Instant lo = Instant::max(), hi = Instant::min();
    for (const auto& t : log.traces()) {
        lo = std::min(lo, t.events.front().timestamp);
        hi = std::max(hi, t.events.front().timestamp);
    }
    if (log.empty()) return log;
    const Instant start = q.from.value_or(lo);
    const Instant end = q.to.value_or(hi + std::chrono::seconds(1));
    return filter_time(log, TimeWindow::make(start, std::max(start, end)));
}

Labeling make_labeling(const EventLog& log, const Gazetteer* gazetteer, const MapQuery& q, bool strict,
                       ValidationReport* unresolved_out) {
    if (!q.level) return Labeling::by_dimension(log, q.dimension);
    if (!gazetteer || gazetteer->empty())
        throw UnresolvableLevel("level '" + std::string(to_string(*q.level)) + "' requested but no gazetteer is loaded");
    auto labeling = Labeling::by_level(*gazetteer, *q.level);
    auto report = unresolved_places(log, labeling);
    if (!report.empty() && (strict || report.issues.size() == log.event_count())) {
        throw UnresolvableLevel(std::to_string(report.issues.size()) + " event(s) cannot be placed at level '" +
                                std::string(to_string(*q.level)) + "'");
    }
    if (unresolved_out) *unresolved_out = std::move(report);
    return labeling;
}

EventLog apply_endpoints(const EventLog& log, const Labeling& labeling, const MapQuery& q) {
    if (!q.source && !q.destination) return log;
    std::vector<Trace> kept;
    for (const auto& t : log.traces()) {
        if (q.source && labeling.label(t.events.front()) != *q.source) continue;
        if (q.destination && labeling.label(t.events.back()) != *q.destination) continue;
        kept.push_back(t);
    }
    return log.with_traces(std::move(kept));
}

} // namespace

bool MapQuery::effective_collapse() const noexcept {
    if (collapse) return *collapse;
    return level.has_value() || dimension.kind != Dimension::Kind::activity;
}

MapQuery MapQuery::from_params(const std::map<std::string, std::string>& params) {
    MapQuery q;
    auto get = [&](const char* key) -> const std::string* {
        auto it = params.find(key);
        return it == params.end() ? nullptr : &it->second;
    };
    if (auto v = get("dimension"); v && !v->empty()) q.dimension = Dimension::parse(*v);
    if (auto v = get("level"); v && !v->empty()) {
        q.level = parse_level(*v);
        if (!q.level) throw ConfigError("level must be office, city, province or country");
    }
    if (auto v = get("collapse"); v && !v->empty()) {
        if (*v == "true" || *v == "1") {
            q.collapse = true;
        } else if (*v == "false" || *v == "0") {
            q.collapse = false;
        } else {
            throw ConfigError("collapse must be true or false");
        }
    }
    if (auto v = get("source"); v && !v->empty()) q.source = *v;
    if (auto v = get("destination"); v && !v->empty()) q.destination = *v;
    for (auto [key, slot] : {std::pair{"from", &q.from}, std::pair{"to", &q.to}}) {
        if (auto v = get(key); v && !v->empty()) {
            *slot = parse_iso_instant(*v);
            if (!*slot) throw ConfigError(std::string(key) + " must be yyyy-MM-dd or yyyy-MM-ddTHH:mm:ss");
        }
    }
    if (q.from && q.to && *q.from > *q.to) throw ConfigError("from is after to");
    if (auto v = get("min_freq"); v && !v->empty()) q.min_freq = parse_count("min_freq", *v);
    return q;
}

EventLog select_traces(const EventLog& log, const Gazetteer* gazetteer, const MapQuery& query, bool strict) {
    const EventLog windowed = apply_time(log, query);
    const auto labeling = make_labeling(windowed, gazetteer, query, strict, nullptr);
    return apply_endpoints(windowed, labeling, query);
}

MapResult run_map(const EventLog& log, const Gazetteer* gazetteer, const MapQuery& query, bool strict) {
    MapResult result;
    const EventLog windowed = apply_time(log, query);
    const auto labeling = make_labeling(windowed, gazetteer, query, strict, &result.unresolved);
    const EventLog selected = apply_endpoints(windowed, labeling, query);
    result.traces_after_filters = selected.case_count();

    auto map = discover(selected, labeling, query.effective_collapse());
    if (query.from || query.to) {
        map.provenance.insert(map.provenance.begin(), "filter_time(" + opt_instant(query.from).dump() + ", " +
                                                          opt_instant(query.to).dump() + ")");
    }
    if (query.source || query.destination) {
        map.provenance.insert(map.provenance.end() - 1, "filter_endpoints(" + opt_string(query.source).dump() +
                                                            ", " + opt_string(query.destination).dump() + ")");
    }
    map = filter_frequency(map, query.min_freq);
    auto annotated = annotate_distances(map);
    result.map = std::move(annotated.map);
    result.missing_distances = std::move(annotated.missing);
    result.layers = to_geojson(result.map);
    return result;
}

ojson map_document(const MapResult& r, const MapQuery& q) {
    std::size_t total_frequency = 0;
    for (const auto& e : r.map.edges) total_frequency += e.frequency;
    ojson summary;
    summary["dimension"] = q.level ? ojson(nullptr) : ojson(q.dimension.name());
    summary["level"] = q.level ? ojson(std::string(to_string(*q.level))) : ojson(nullptr);
    summary["collapse"] = q.effective_collapse();
    summary["filters"] = {{"source", opt_string(q.source)},
                          {"destination", opt_string(q.destination)},
                          {"from", opt_instant(q.from)},
                          {"to", opt_instant(q.to)},
                          {"min_freq", q.min_freq}};
    summary["trace_count"] = r.traces_after_filters;
    summary["node_count"] = r.map.nodes.size();
    summary["edge_count"] = r.map.edges.size();
    summary["total_frequency"] = total_frequency;
    summary["negative_durations"] = r.map.quality.negative_durations;
    summary["unresolved_places"] = r.unresolved.issues.size();
    summary["skipped"] = r.layers.skipped;
    summary["missing_distances"] = r.missing_distances;
    summary["provenance"] = r.map.provenance;
    summary["units"] = {{"distance", "km"}, {"duration", "s"}, {"speed", "km/h"}};

    ojson doc;
    doc["summary"] = std::move(summary);
    doc["nodes"] = r.layers.nodes.to_document();
    doc["edges"] = r.layers.edges.to_document();
    return doc;
}

std::vector<PathAssessment> run_variants(const EventLog& log, const Gazetteer* gazetteer, const MapQuery& query,
                                         bool strict) {
    const EventLog windowed = apply_time(log, query);
    const auto labeling = make_labeling(windowed, gazetteer, query, strict, nullptr);
    return assess(variants(apply_endpoints(windowed, labeling, query), labeling));
}

ojson variants_document(const std::vector<PathAssessment>& rows) {
    ojson doc;
    doc["variant_count"] = rows.size();
    doc["units"] = {{"distance", "km"}, {"duration", "s"}};
    doc["variants"] = assessments_to_json(rows);
    return doc;
}

FrameSet run_frames(const EventLog& log, const Gazetteer* gazetteer, const MapQuery& query, std::int64_t bin_s,
                    bool strict) {
    if (bin_s <= 0) throw ConfigError("bin_s must be positive");
    const EventLog windowed = apply_time(log, query);
    const auto labeling = make_labeling(windowed, gazetteer, query, strict, nullptr);
    const EventLog selected = apply_endpoints(windowed, labeling, query);
    auto frames = dynamic_frames(selected, labeling, query.effective_collapse(), bin_s);
    for (auto& f : frames.frames) f.map = annotate_distances(filter_frequency(f.map, query.min_freq)).map;
    return frames;
}

ojson frames_document(const FrameSet& frames) {
    ojson doc;
    doc["bin_width_s"] = frames.bin_width_s;
    doc["frame_count"] = frames.frames.size();
    auto list = ojson::array();
    for (const auto& f : frames.frames) {
        ojson item;
        item["start"] = format_iso(f.window.start);
        item["end"] = format_iso(f.window.end);
        item["trace_count"] = f.map.trace_count;
        auto layers = to_geojson(f.map);
        item["nodes"] = layers.nodes.to_document();
        item["edges"] = layers.edges.to_document();
        list.push_back(std::move(item));
    }
    doc["frames"] = std::move(list);
    return doc;
}

} // namespace geomine
