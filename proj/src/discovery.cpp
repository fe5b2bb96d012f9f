#include "geomine/discovery.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "geomine/error.hpp"

namespace geomine {

namespace {

/// A run of events [first, last] in a trace sharing one label.
struct StepView {
    std::string_view label;
    std::size_t first = 0;
    std::size_t last = 0;
};

template <typename Fn>
void for_each_step(const Trace& trace, const Labeling& labeling, bool collapse, std::vector<StepView>& buf,
                   Fn&& fn) {
    buf.clear();
    const auto& ev = trace.events;
    for (std::size_t i = 0; i < ev.size(); ++i) {
        auto label = labeling.label(ev[i]);
        if (collapse && !buf.empty() && buf.back().label == label) {
            buf.back().last = i;
        } else {
            buf.push_back({label, i, i});
        }
    }
    fn(static_cast<const std::vector<StepView>&>(buf));
}

Step to_step(const Trace& t, const StepView& v) {
    const auto& a = t.events[v.first];
    const auto& b = t.events[v.last];
    return Step{std::string(v.label), a.timestamp, b.timestamp, a.location, b.location, v.last - v.first + 1};
}

std::string_view non_empty(std::string_view v) { return v.empty() ? kUnknownLabel : v; }

nlohmann::ordered_json coord_json(const std::optional<Coordinate>& c) {
    if (!c) return nullptr;
    return {{"lat", c->lat}, {"lon", c->lon}};
}

nlohmann::ordered_json opt_json(const std::optional<double>& v) {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

} // namespace

Dimension Dimension::parse(std::string_view text) {
    if (text == "activity") return activity();
    if (text == "city") return city();
    if (text == "resource") return resource();
    if (text.substr(0, 7) == "custom:") text.remove_prefix(7);
    if (text.empty()) throw ConfigError("empty dimension");
    return custom(std::string(text));
}

std::string Dimension::name() const {
    switch (kind) {
    case Kind::activity: return "activity";
    case Kind::city: return "city";
    case Kind::resource: return "resource";
    case Kind::custom: return "custom:" + column;
    }
    return {};
}

Labeling Labeling::by_dimension(const EventLog& log, Dimension dim) {
    Labeling l;
    if (dim.kind == Dimension::Kind::custom) {
        const auto& s = log.schema();
        // A custom dimension may also name a mapped column.
        if (dim.column == s.activity_col) {
            dim = Dimension::activity();
        } else if (s.city_col && dim.column == *s.city_col) {
            dim = Dimension::city();
        } else if (s.resource_col && dim.column == *s.resource_col) {
            dim = Dimension::resource();
        } else {
            l.extra_ = log.extra_index(dim.column);
            if (!l.extra_) throw SchemaError("dimension column '" + dim.column + "' not in the log");
        }
    }
    l.dim_ = std::move(dim);
    return l;
}

Labeling Labeling::by_level(const Gazetteer& gazetteer, Level level) {
    Labeling l;
    l.gazetteer_ = &gazetteer;
    l.level_ = level;
    l.cache_ = std::make_shared<std::unordered_map<std::string, const Place*>>();
    return l;
}

const Place* Labeling::place(const Event& e) const {
    if (!gazetteer_) return nullptr;
    std::string key;
    key.reserve(e.resource.size() + e.city.size() + 1);
    key.append(e.resource).push_back('\x1f');
    key.append(e.city);
    auto it = cache_->find(key);
    if (it != cache_->end()) return it->second;

    const Place* src = nullptr;
    if (!e.resource.empty()) src = gazetteer_->find(e.resource, Level::office);
    if (!src && !e.city.empty()) src = gazetteer_->find(e.city, Level::city);
    const Place* result = nullptr;
    if (src && src->level <= *level_) {
        try {
            result = &gazetteer_->ancestor_at_level(src->id, *level_);
        } catch (const HierarchyError&) {
            result = nullptr;
        }
    }
    cache_->emplace(std::move(key), result);
    return result;
}

std::string_view Labeling::label(const Event& e) const {
    if (gazetteer_) {
        const Place* p = place(e);
        return p ? std::string_view(p->name) : kUnknownLabel;
    }
    switch (dim_.kind) {
    case Dimension::Kind::activity: return non_empty(e.activity);
    case Dimension::Kind::city: return non_empty(e.city);
    case Dimension::Kind::resource: return non_empty(e.resource);
    case Dimension::Kind::custom: return *extra_ < e.extra.size() ? non_empty(e.extra[*extra_]) : kUnknownLabel;
    }
    return kUnknownLabel;
}

std::vector<ProjectedTrace> project(const EventLog& log, const Dimension& dim, bool collapse_repeats) {
    return project(log, Labeling::by_dimension(log, dim), collapse_repeats);
}

std::vector<ProjectedTrace> project(const EventLog& log, const Labeling& labeling, bool collapse_repeats) {
    std::vector<ProjectedTrace> out;
    out.reserve(log.case_count());
    std::vector<StepView> buf;
    for (const auto& t : log.traces()) {
        for_each_step(t, labeling, collapse_repeats, buf, [&](const std::vector<StepView>& steps) {
            ProjectedTrace p{t.case_id, {}};
            p.steps.reserve(steps.size());
            for (const auto& s : steps) p.steps.push_back(to_step(t, s));
            out.push_back(std::move(p));
        });
    }
    return out;
}

const DfgNode* ProcessMap::find_node(std::string_view label) const noexcept {
    auto it = std::lower_bound(nodes.begin(), nodes.end(), label,
                               [](const DfgNode& n, std::string_view l) { return n.label < l; });
    return it != nodes.end() && it->label == label ? &*it : nullptr;
}

const DfgEdge* ProcessMap::find_edge(std::string_view source, std::string_view target) const noexcept {
    auto key = std::pair(source, target);
    auto it = std::lower_bound(edges.begin(), edges.end(), key, [](const DfgEdge& e, const auto& k) {
        return std::pair<std::string_view, std::string_view>(e.source, e.target) < k;
    });
    return it != edges.end() && it->source == source && it->target == target ? &*it : nullptr;
}

nlohmann::ordered_json ProcessMap::to_json() const {
    nlohmann::ordered_json doc;
    doc["dimension"] = dimension.name();
    doc["level"] = level ? nlohmann::ordered_json(std::string(to_string(*level))) : nlohmann::ordered_json(nullptr);
    doc["collapse_repeats"] = collapse_repeats;
    doc["trace_count"] = trace_count;
    doc["provenance"] = provenance;
    doc["quality"] = {{"negative_durations", quality.negative_durations}};
    auto& ns = doc["nodes"] = nlohmann::ordered_json::array();
    for (const auto& n : nodes) {
        ns.push_back({{"label", n.label},
                      {"coord", coord_json(n.coord)},
                      {"visit_count", n.visit_count},
                      {"case_count", n.case_count}});
    }
    auto& es = doc["edges"] = nlohmann::ordered_json::array();
    for (const auto& e : edges) {
        es.push_back({{"source", e.source},
                      {"target", e.target},
                      {"frequency", e.frequency},
                      {"case_frequency", e.case_frequency},
                      {"durations",
                       {{"min_s", e.durations.min_s},
                        {"max_s", e.durations.max_s},
                        {"mean_s", e.durations.mean_s},
                        {"median_s", e.durations.median_s}}},
                      {"transit_km", opt_json(e.transit_km)},
                      {"distance_km", opt_json(e.distance_km)}});
    }
    return doc;
}

ProcessMap discover(const EventLog& log, const Dimension& dim, bool collapse_repeats) {
    return discover(log, Labeling::by_dimension(log, dim), collapse_repeats);
}

ProcessMap discover(const EventLog& log, const Labeling& labeling, bool collapse_repeats) {
    struct NodeAcc {
        std::string_view label;
        std::size_t visits = 0;
        std::size_t cases = 0;
        std::size_t last_trace = SIZE_MAX;
        double lat_sum = 0.0, lon_sum = 0.0;
        std::size_t located = 0;
    };
    struct EdgeAcc {
        std::size_t source = 0, target = 0;
        std::size_t freq = 0;
        std::size_t cases = 0;
        std::size_t last_trace = SIZE_MAX;
        std::vector<std::int64_t> durations;
        double km_sum = 0.0;
        std::size_t km_samples = 0;
    };

    std::vector<NodeAcc> nodes;
    std::unordered_map<std::string_view, std::size_t> node_index;
    std::vector<EdgeAcc> edges;
    std::unordered_map<std::uint64_t, std::size_t> edge_index;
    ProcessMap map;
    map.dimension = labeling.dimension();
    map.level = labeling.level();
    map.collapse_repeats = collapse_repeats;
    map.trace_count = log.case_count();

    std::vector<StepView> buf;
    std::vector<std::size_t> step_nodes;
    const auto& traces = log.traces();
    for (std::size_t ti = 0; ti < traces.size(); ++ti) {
        const auto& t = traces[ti];
        for_each_step(t, labeling, collapse_repeats, buf, [&](const std::vector<StepView>& steps) {
            step_nodes.clear();
            for (const auto& s : steps) {
                auto [it, inserted] = node_index.try_emplace(s.label, nodes.size());
                if (inserted) {
                    NodeAcc acc;
                    acc.label = s.label;
                    nodes.push_back(acc);
                }
                auto& n = nodes[it->second];
                ++n.visits;
                if (n.last_trace != ti) {
                    n.last_trace = ti;
                    ++n.cases;
                }
                for (std::size_t i = s.first; i <= s.last; ++i) {
                    if (const auto& loc = t.events[i].location) {
                        n.lat_sum += loc->lat;
                        n.lon_sum += loc->lon;
                        ++n.located;
                    }
                }
                step_nodes.push_back(it->second);
            }
            for (std::size_t k = 0; k + 1 < steps.size(); ++k) {
                const std::uint64_t key = (static_cast<std::uint64_t>(step_nodes[k]) << 32) | step_nodes[k + 1];
                auto [it, inserted] = edge_index.try_emplace(key, edges.size());
                if (inserted) {
                    EdgeAcc acc;
                    acc.source = step_nodes[k];
                    acc.target = step_nodes[k + 1];
                    edges.push_back(std::move(acc));
                }
                auto& e = edges[it->second];
                ++e.freq;
                if (e.last_trace != ti) {
                    e.last_trace = ti;
                    ++e.cases;
                }
                const auto& from = t.events[steps[k].last];
                const auto& to = t.events[steps[k + 1].first];
                auto d = (to.timestamp - from.timestamp).count();
                if (d < 0) {
                    ++map.quality.negative_durations;
                    d = 0;
                }
                e.durations.push_back(d);
                if (from.location && to.location) {
                    e.km_sum += haversine_km(*from.location, *to.location);
                    ++e.km_samples;
                }
            }
        });
    }

    std::vector<std::size_t> order(nodes.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return nodes[a].label < nodes[b].label; });
    map.nodes.reserve(nodes.size());
    for (auto i : order) {
        const auto& n = nodes[i];
        DfgNode out{std::string(n.label), std::nullopt, n.visits, n.cases};
        if (n.located) {
            out.coord = Coordinate{n.lat_sum / static_cast<double>(n.located),
                                   n.lon_sum / static_cast<double>(n.located)};
        }
        map.nodes.push_back(std::move(out));
    }

    map.edges.reserve(edges.size());
    for (auto& e : edges) {
        DfgEdge out;
        out.source = std::string(nodes[e.source].label);
        out.target = std::string(nodes[e.target].label);
        out.frequency = e.freq;
        out.case_frequency = e.cases;
        auto& d = e.durations;
        std::sort(d.begin(), d.end());
        out.durations.min_s = d.front();
        out.durations.max_s = d.back();
        long double sum = 0;
        for (auto v : d) sum += v;
        out.durations.mean_s = static_cast<double>(sum / static_cast<long double>(d.size()));
        const auto mid = d.size() / 2;
        out.durations.median_s = d.size() % 2 ? static_cast<double>(d[mid])
                                               : (static_cast<double>(d[mid - 1]) + static_cast<double>(d[mid])) / 2.0;
        if (e.km_samples) out.transit_km = e.km_sum / static_cast<double>(e.km_samples);
        map.edges.push_back(std::move(out));
    }
    std::sort(map.edges.begin(), map.edges.end(), [](const DfgEdge& a, const DfgEdge& b) {
        return std::tie(a.source, a.target) < std::tie(b.source, b.target);
    });

    map.provenance.push_back("discover(" +
                             (map.level ? "level=" + std::string(to_string(*map.level)) : "dimension=" + map.dimension.name()) +
                             ", collapse=" + (collapse_repeats ? "true" : "false") + ")");
    return map;
}

EventLog filter_endpoints(const EventLog& log, const Dimension& dim, std::string_view source,
                          std::string_view destination) {
    return filter_endpoints(log, Labeling::by_dimension(log, dim), source, destination);
}

EventLog filter_endpoints(const EventLog& log, const Labeling& labeling, std::string_view source,
                          std::string_view destination) {
    std::vector<Trace> kept;
    for (const auto& t : log.traces()) {
        // First and last collapsed labels are the first and last event labels.
        if (labeling.label(t.events.front()) == source && labeling.label(t.events.back()) == destination)
            kept.push_back(t);
    }
    return log.with_traces(std::move(kept));
}

TimeWindow TimeWindow::make(Instant start, Instant end) {
    if (start > end) throw ConfigError("time window start is after its end");
    return TimeWindow{start, end};
}

EventLog filter_time(const EventLog& log, const TimeWindow& window) {
    std::vector<Trace> kept;
    for (const auto& t : log.traces())
        if (window.contains(t.events.front().timestamp)) kept.push_back(t);
    return log.with_traces(std::move(kept));
}

ProcessMap filter_frequency(const ProcessMap& map, std::size_t min_freq) {
    ProcessMap out = map;
    if (min_freq == 0) return out;
    std::erase_if(out.edges, [&](const DfgEdge& e) { return e.frequency < min_freq; });
    if (map.nodes.size() != 1) {
        std::erase_if(out.nodes, [&](const DfgNode& n) {
            return std::none_of(out.edges.begin(), out.edges.end(),
                                [&](const DfgEdge& e) { return e.source == n.label || e.target == n.label; });
        });
    }
    out.provenance.push_back("filter_frequency(min_freq=" + std::to_string(min_freq) + ")");
    return out;
}

ValidationReport unresolved_places(const EventLog& log, const Labeling& labeling) {
    ValidationReport report;
    if (!labeling.level()) return report;
    for (const auto& t : log.traces()) {
        for (const auto& e : t.events) {
            if (!labeling.place(e)) {
                report.issues.push_back({IssueKind::unresolved_place, t.case_id, e.event_id, 0,
                                         "resource '" + e.resource + "', city '" + e.city + "' not placeable at " +
                                             std::string(to_string(*labeling.level()))});
            }
        }
    }
    return report;
}

AggregateResult aggregate(const EventLog& log, const Gazetteer& gazetteer, Level level, bool collapse_repeats,
                          bool strict) {
    auto labeling = Labeling::by_level(gazetteer, level);
    AggregateResult result;
    result.report = unresolved_places(log, labeling);
    if (strict && !result.report.empty()) {
        const auto& first = result.report.issues.front();
        throw DataError("event " + first.event_id + " of case " + first.case_id + ": " + first.detail);
    }
    result.map = discover(log, labeling, collapse_repeats);
    return result;
}

std::vector<Variant> variants(const EventLog& log, const Dimension& dim) {
    return variants(log, Labeling::by_dimension(log, dim));
}

std::vector<Variant> variants(const EventLog& log, const Labeling& labeling) {
    struct Acc {
        std::size_t cases = 0;
        double km_sum = 0.0;
        std::size_t km_cases = 0;
        long double duration_sum = 0;
    };
    std::map<std::vector<std::string_view>, Acc> groups;
    std::vector<StepView> buf;
    std::vector<std::string_view> path;
    for (const auto& t : log.traces()) {
        for_each_step(t, labeling, true, buf, [&](const std::vector<StepView>& steps) {
            path.clear();
            double km = 0.0;
            bool complete = true;
            for (std::size_t k = 0; k < steps.size(); ++k) {
                path.push_back(steps[k].label);
                if (k + 1 < steps.size()) {
                    const auto& from = t.events[steps[k].last].location;
                    const auto& to = t.events[steps[k + 1].first].location;
                    if (from && to) {
                        km += haversine_km(*from, *to);
                    } else {
                        complete = false;
                    }
                }
            }
            auto& acc = groups[path];
            ++acc.cases;
            if (complete) {
                acc.km_sum += km;
                ++acc.km_cases;
            }
            acc.duration_sum += (t.events.back().timestamp - t.events.front().timestamp).count();
        });
    }

    std::vector<Variant> out;
    out.reserve(groups.size());
    for (const auto& [p, acc] : groups) {
        Variant v;
        v.path.assign(p.begin(), p.end());
        v.case_count = acc.cases;
        if (acc.km_cases) v.total_distance_km = acc.km_sum / static_cast<double>(acc.km_cases);
        v.mean_duration_s = static_cast<double>(acc.duration_sum / static_cast<long double>(acc.cases));
        out.push_back(std::move(v));
    }
    std::stable_sort(out.begin(), out.end(), [](const Variant& a, const Variant& b) {
        if (a.case_count != b.case_count) return a.case_count > b.case_count;
        return a.path < b.path;
    });
    return out;
}

} // namespace geomine
