#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "geomine/eventlog.hpp"
#include "geomine/geo.hpp"
#include "geomine/time.hpp"

namespace geomine {

inline constexpr std::string_view kUnknownLabel = "<unknown>";

/// Which event attribute becomes the node label.
struct Dimension {
    enum class Kind { activity, city, resource, custom };
    Kind kind = Kind::city;
    std::string column; ///< only for custom

    static Dimension activity() { return {Kind::activity, {}}; }
    static Dimension city() { return {Kind::city, {}}; }
    static Dimension resource() { return {Kind::resource, {}}; }
    static Dimension custom(std::string column) { return {Kind::custom, std::move(column)}; }

    /// "activity", "city", "resource", "custom:<column>"; any other non-empty
    /// text is taken as a custom column name.
    static Dimension parse(std::string_view text);
    std::string name() const;

    friend bool operator==(const Dimension&, const Dimension&) = default;
};

/// Maps events to node labels, either by a log column or by the gazetteer
/// ancestor of the event's place at a fixed level.
///
/// An event's place is the office named by its resource when the gazetteer
/// has one, otherwise the city named by its city column. Places coarser than
/// the requested level do not resolve. Missing values and unresolved places
/// label as kUnknownLabel.
///
/// Returned views point into the log's events or the gazetteer, which must
/// outlive every use. Not thread-safe: level labelings memoize lookups.
class Labeling {
public:
    /// Throws SchemaError when a custom column is not present in the log.
    static Labeling by_dimension(const EventLog& log, Dimension dim);
    static Labeling by_level(const Gazetteer& gazetteer, Level level);

    std::string_view label(const Event& e) const;
    /// The gazetteer place behind label(e), or nullptr for dimension labelings
    /// and unresolved events.
    const Place* place(const Event& e) const;

    const Dimension& dimension() const noexcept { return dim_; }
    std::optional<Level> level() const noexcept { return level_; }

private:
    Labeling() = default;
    Dimension dim_;
    std::optional<std::size_t> extra_;
    const Gazetteer* gazetteer_ = nullptr;
    std::optional<Level> level_;
    std::shared_ptr<std::unordered_map<std::string, const Place*>> cache_;
};

/// One step of a projected trace: a single event, or a run of consecutive
/// events sharing a label when repeats are collapsed.
struct Step {
    std::string label;
    Instant start{};                       ///< first event of the run
    Instant exit{};                        ///< last event of the run
    std::optional<Coordinate> entry_location; ///< location of the first event
    std::optional<Coordinate> exit_location;  ///< location of the last event
    std::size_t event_count = 1;

    friend bool operator==(const Step&, const Step&) = default;
};

struct ProjectedTrace {
    std::string case_id;
    std::vector<Step> steps;
};

std::vector<ProjectedTrace> project(const EventLog& log, const Dimension& dim, bool collapse_repeats);
std::vector<ProjectedTrace> project(const EventLog& log, const Labeling& labeling, bool collapse_repeats);

struct DurationStats {
    std::int64_t min_s = 0;
    std::int64_t max_s = 0;
    double mean_s = 0.0;
    double median_s = 0.0;

    friend bool operator==(const DurationStats&, const DurationStats&) = default;
};

struct DfgNode {
    std::string label;
    /// Mean of the contributing events' locations.
    std::optional<Coordinate> coord;
    std::size_t visit_count = 0;
    std::size_t case_count = 0;

    friend bool operator==(const DfgNode&, const DfgNode&) = default;
};

struct DfgEdge {
    std::string source;
    std::string target;
    std::size_t frequency = 0;
    std::size_t case_frequency = 0;
    /// From the source step's last event to the target step's first event.
    DurationStats durations;
    /// Mean great-circle length of the observed transitions (source step's
    /// last event location to target step's first event location), over the
    /// occurrences where both are known.
    std::optional<double> transit_km;
    /// Set by annotate_distances.
    std::optional<double> distance_km;

    bool self_loop() const noexcept { return source == target; }
    friend bool operator==(const DfgEdge&, const DfgEdge&) = default;
};

struct QualityCounters {
    /// Transitions whose target started before the source exited; clamped to 0 s.
    std::size_t negative_durations = 0;

    friend bool operator==(const QualityCounters&, const QualityCounters&) = default;
};

struct ProcessMap {
    std::vector<DfgNode> nodes; ///< sorted by label
    std::vector<DfgEdge> edges; ///< sorted by (source, target)
    Dimension dimension;
    std::optional<Level> level;
    bool collapse_repeats = true;
    std::size_t trace_count = 0;
    std::vector<std::string> provenance;
    QualityCounters quality;

    const DfgNode* find_node(std::string_view label) const noexcept;
    const DfgEdge* find_edge(std::string_view source, std::string_view target) const noexcept;

    /// Structured document with stable field order.
    nlohmann::ordered_json to_json() const;

    friend bool operator==(const ProcessMap&, const ProcessMap&) = default;
};

ProcessMap discover(const EventLog& log, const Dimension& dim, bool collapse_repeats);
ProcessMap discover(const EventLog& log, const Labeling& labeling, bool collapse_repeats);

/// Keeps traces whose first projected label (repeats collapsed) is `source`
/// and whose last is `destination`.
EventLog filter_endpoints(const EventLog& log, const Dimension& dim, std::string_view source,
                          std::string_view destination);
EventLog filter_endpoints(const EventLog& log, const Labeling& labeling, std::string_view source,
                          std::string_view destination);

/// Half-open [start, end). Throws ConfigError if start > end.
struct TimeWindow {
    Instant start{};
    Instant end{};

    static TimeWindow make(Instant start, Instant end);
    bool contains(Instant t) const noexcept { return t >= start && t < end; }
};

/// Keeps whole traces whose first event falls inside the window.
EventLog filter_time(const EventLog& log, const TimeWindow& window);

/// Drops edges below min_freq, then nodes left without incident edges
/// (a single-node map keeps its node).
ProcessMap filter_frequency(const ProcessMap& map, std::size_t min_freq);

struct AggregateResult {
    ProcessMap map;
    /// One unresolved_place issue per event that could not be placed at the level.
    ValidationReport report;
};

/// Relabels every event by its gazetteer ancestor at `level` and discovers.
/// In strict mode an unresolved event throws DataError.
AggregateResult aggregate(const EventLog& log, const Gazetteer& gazetteer, Level level,
                          bool collapse_repeats, bool strict = false);

/// Unresolved events under a level labeling, as a report.
ValidationReport unresolved_places(const EventLog& log, const Labeling& labeling);

struct Variant {
    std::vector<std::string> path;
    std::size_t case_count = 0;
    /// Mean over the variant's cases of the summed transition lengths; set
    /// only when at least one case has every transition located.
    std::optional<double> total_distance_km;
    /// Mean end-to-end case duration (last event minus first event).
    double mean_duration_s = 0.0;

    friend bool operator==(const Variant&, const Variant&) = default;
};

/// Distinct collapsed label sequences, by case_count descending then path.
std::vector<Variant> variants(const EventLog& log, const Dimension& dim);
std::vector<Variant> variants(const EventLog& log, const Labeling& labeling);

} // namespace geomine
