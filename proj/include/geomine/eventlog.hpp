#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "geomine/geo.hpp"
#include "geomine/time.hpp"

namespace geomine {

/// Column-role assignment for a CSV log. Defaults match the reference parcel log layout
/// (Case_id, Event_id, Timestamp, Activity, Resource, City, Location).
struct SchemaMapping {
    std::string case_id_col = "Case_id";
    std::optional<std::string> event_id_col = "Event_id";
    std::string timestamp_col = "Timestamp";
    std::string timestamp_format = "dd-MM-yyyy: HH.mm";
    std::string activity_col = "Activity";
    std::optional<std::string> resource_col = "Resource";
    std::optional<std::string> city_col = "City";
    std::optional<std::string> location_col = "Location";
    char delimiter = ',';

    /// Unknown keys are rejected; missing keys keep their defaults. A key
    /// set to null unmaps an optional column.
    static SchemaMapping from_json(const nlohmann::json& doc);
    nlohmann::json to_json() const;
};

struct Event {
    std::string event_id;
    std::string case_id;
    Instant timestamp{};
    std::string activity;
    std::string resource;
    std::string city;
    std::optional<Coordinate> location;
    /// Values of unmapped columns, aligned with EventLog::extra_columns().
    std::vector<std::string> extra;
    /// 0-based data-row index in the source file. Metadata only: excluded from equality.
    std::size_t source_row = 0;

    friend bool operator==(const Event& a, const Event& b) {
        return a.event_id == b.event_id && a.case_id == b.case_id && a.timestamp == b.timestamp &&
               a.activity == b.activity && a.resource == b.resource && a.city == b.city &&
               a.location == b.location && a.extra == b.extra;
    }
};

struct Trace {
    std::string case_id;
    std::vector<Event> events;

    friend bool operator==(const Trace&, const Trace&) = default;
};

struct SourceMeta {
    std::string filename;
    std::size_t row_count = 0;
};

/// Numeric-aware ordering for identifiers: two all-digit strings compare as
/// numbers, anything else lexicographically.
bool id_less(std::string_view a, std::string_view b) noexcept;

/// Immutable event log. Traces are sorted by case id; events inside a trace
/// by (timestamp, event id).
class EventLog {
public:
    EventLog() = default;
    /// Normalizes: groups nothing, but sorts each trace and the trace list.
    /// Throws SchemaError on empty traces or events whose case id differs from their trace.
    EventLog(std::vector<Trace> traces, SchemaMapping schema, SourceMeta meta = {},
             std::vector<std::string> extra_columns = {});

    const std::vector<Trace>& traces() const noexcept { return traces_; }
    const SchemaMapping& schema() const noexcept { return schema_; }
    const SourceMeta& source_meta() const noexcept { return meta_; }
    const std::vector<std::string>& extra_columns() const noexcept { return extra_columns_; }

    std::size_t case_count() const noexcept { return traces_.size(); }
    std::size_t event_count() const noexcept;
    bool empty() const noexcept { return traces_.empty(); }
    const Trace* find(std::string_view case_id) const noexcept;

    /// Same schema/meta/columns, different traces.
    EventLog with_traces(std::vector<Trace> traces) const;

    /// Index into Event::extra for a column name, if it is an unmapped column.
    std::optional<std::size_t> extra_index(std::string_view column) const noexcept;

    friend bool operator==(const EventLog& a, const EventLog& b) {
        return a.traces_ == b.traces_ && a.extra_columns_ == b.extra_columns_;
    }

private:
    std::vector<Trace> traces_;
    SchemaMapping schema_;
    SourceMeta meta_;
    std::vector<std::string> extra_columns_;
};

enum class IssueKind {
    malformed_row,
    malformed_timestamp,
    malformed_coordinate,
    coordinate_out_of_range,
    reordered_trace,
    missing_location,
    duplicate_event_id,
    single_event_trace,
    unresolved_city,
    unresolved_place,
};

std::string_view to_string(IssueKind kind) noexcept;

struct Issue {
    IssueKind kind;
    std::string case_id;
    std::string event_id;
    /// 1-based source line, 0 when not tied to a row.
    std::size_t line = 0;
    std::string detail;
};

struct ValidationReport {
    std::vector<Issue> issues;

    bool empty() const noexcept { return issues.empty(); }
    std::size_t count(IssueKind kind) const noexcept;
    void append(const ValidationReport& other);

    std::string to_text() const;
    nlohmann::json to_json() const;
    /// {"total": n, "<kind>": count, ...} for kinds with a non-zero count.
    nlohmann::json summary() const;
};

struct ParseOptions {
    /// Throw DataError on the first malformed row instead of skipping it.
    bool strict = false;
};

struct ParseResult {
    EventLog log;
    ValidationReport report;
    std::size_t skipped_rows = 0;
};

/// Throws SchemaError when a mapped column is absent from the header (or the
/// header itself is missing), ConfigError when the file cannot be opened.
ParseResult parse_csv(const std::filesystem::path& path, const SchemaMapping& schema,
                      ParseOptions options = {});
ParseResult parse_csv(std::istream& in, const SchemaMapping& schema, ParseOptions options = {},
                      std::string source_name = {});

/// Writes the log back using its schema's column names and timestamp format.
void write_csv(const EventLog& log, std::ostream& out);

/// Per-trace anomalies: rows out of chronological order in the source,
/// missing locations, duplicate event ids, single-event traces.
ValidationReport validate(const EventLog& log);

struct GeocodeResult {
    EventLog log;
    /// One unresolved_city issue per event left without a location.
    ValidationReport report;
};

/// Fills missing event locations from the city-level gazetteer entry named by
/// the event's city. Existing locations are kept. In strict mode an unknown
/// city throws DataError.
GeocodeResult geocode(const EventLog& log, const Gazetteer& gazetteer, bool strict = false);

} // namespace geomine
