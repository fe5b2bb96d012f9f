#include "geomine/eventlog.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "geomine/csv.hpp"
#include "geomine/error.hpp"

namespace geomine {

namespace {

bool all_digits(std::string_view s) noexcept {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

bool event_less(const Event& a, const Event& b) noexcept {
    if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
    if (a.event_id != b.event_id) return id_less(a.event_id, b.event_id);
    return a.source_row < b.source_row;
}

std::optional<double> to_double(std::string_view s) {
    s = csv::trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

void set_optional(const nlohmann::json& doc, const char* key, std::optional<std::string>& slot) {
    if (!doc.contains(key)) return;
    const auto& v = doc.at(key);
    if (v.is_null()) {
        slot.reset();
    } else if (v.is_string()) {
        slot = v.get<std::string>();
    } else {
        throw ConfigError(std::string("schema key '") + key + "' must be a string or null");
    }
}

void set_required(const nlohmann::json& doc, const char* key, std::string& slot) {
    if (!doc.contains(key)) return;
    const auto& v = doc.at(key);
    if (!v.is_string() || v.get<std::string>().empty())
        throw ConfigError(std::string("schema key '") + key + "' must be a non-empty string");
    slot = v.get<std::string>();
}

} // namespace

bool id_less(std::string_view a, std::string_view b) noexcept {
    if (all_digits(a) && all_digits(b)) {
        auto strip = [](std::string_view s) {
            auto p = s.find_first_not_of('0');
            return p == std::string_view::npos ? std::string_view{} : s.substr(p);
        };
        auto sa = strip(a), sb = strip(b);
        if (sa.size() != sb.size()) return sa.size() < sb.size();
        if (sa != sb) return sa < sb;
    }
    return a < b;
}

SchemaMapping SchemaMapping::from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw ConfigError("schema document must be a JSON object");
    static const std::unordered_set<std::string> known = {
        "case_id_col", "event_id_col", "timestamp_col", "timestamp_format", "activity_col",
        "resource_col", "city_col", "location_col", "delimiter"};
    for (const auto& [key, _] : doc.items())
        if (!known.count(key)) throw ConfigError("unknown schema key '" + key + "'");

    SchemaMapping s;
    set_required(doc, "case_id_col", s.case_id_col);
    set_required(doc, "timestamp_col", s.timestamp_col);
    set_required(doc, "timestamp_format", s.timestamp_format);
    set_required(doc, "activity_col", s.activity_col);
    set_optional(doc, "event_id_col", s.event_id_col);
    set_optional(doc, "resource_col", s.resource_col);
    set_optional(doc, "city_col", s.city_col);
    set_optional(doc, "location_col", s.location_col);
    if (doc.contains("delimiter")) {
        const auto& d = doc.at("delimiter");
        if (!d.is_string() || d.get<std::string>().size() != 1)
            throw ConfigError("schema key 'delimiter' must be a single character");
        s.delimiter = d.get<std::string>()[0];
    }
    TimestampFormat check(s.timestamp_format);
    return s;
}

nlohmann::json SchemaMapping::to_json() const {
    auto opt = [](const std::optional<std::string>& v) -> nlohmann::json {
        return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
    };
    return {{"case_id_col", case_id_col},       {"event_id_col", opt(event_id_col)},
            {"timestamp_col", timestamp_col},   {"timestamp_format", timestamp_format},
            {"activity_col", activity_col},     {"resource_col", opt(resource_col)},
            {"city_col", opt(city_col)},        {"location_col", opt(location_col)},
            {"delimiter", std::string(1, delimiter)}};
}

EventLog::EventLog(std::vector<Trace> traces, SchemaMapping schema, SourceMeta meta,
                   std::vector<std::string> extra_columns)
    : traces_(std::move(traces)), schema_(std::move(schema)), meta_(std::move(meta)),
      extra_columns_(std::move(extra_columns)) {
    for (auto& t : traces_) {
        if (t.events.empty()) throw SchemaError("trace '" + t.case_id + "' has no events");
        for (const auto& e : t.events)
            if (e.case_id != t.case_id)
                throw SchemaError("event '" + e.event_id + "' does not belong to trace '" + t.case_id + "'");
        if (!std::is_sorted(t.events.begin(), t.events.end(), event_less))
            std::stable_sort(t.events.begin(), t.events.end(), event_less);
    }
    auto trace_less = [](const Trace& a, const Trace& b) { return id_less(a.case_id, b.case_id); };
    if (!std::is_sorted(traces_.begin(), traces_.end(), trace_less))
        std::sort(traces_.begin(), traces_.end(), trace_less);
}

std::size_t EventLog::event_count() const noexcept {
    std::size_t n = 0;
    for (const auto& t : traces_) n += t.events.size();
    return n;
}

const Trace* EventLog::find(std::string_view case_id) const noexcept {
    auto it = std::lower_bound(traces_.begin(), traces_.end(), case_id,
                               [](const Trace& t, std::string_view id) { return id_less(t.case_id, id); });
    if (it == traces_.end() || it->case_id != case_id) return nullptr;
    return &*it;
}

EventLog EventLog::with_traces(std::vector<Trace> traces) const {
    return EventLog(std::move(traces), schema_, meta_, extra_columns_);
}

std::optional<std::size_t> EventLog::extra_index(std::string_view column) const noexcept {
    for (std::size_t i = 0; i < extra_columns_.size(); ++i)
        if (extra_columns_[i] == column) return i;
    return std::nullopt;
}

std::string_view to_string(IssueKind kind) noexcept {
    switch (kind) {
    case IssueKind::malformed_row: return "malformed_row";
    case IssueKind::malformed_timestamp: return "malformed_timestamp";
    case IssueKind::malformed_coordinate: return "malformed_coordinate";
    case IssueKind::coordinate_out_of_range: return "coordinate_out_of_range";
    case IssueKind::reordered_trace: return "reordered_trace";
    case IssueKind::missing_location: return "missing_location";
    case IssueKind::duplicate_event_id: return "duplicate_event_id";
    case IssueKind::single_event_trace: return "single_event_trace";
    case IssueKind::unresolved_city: return "unresolved_city";
    case IssueKind::unresolved_place: return "unresolved_place";
    }
    return "unknown";
}

std::size_t ValidationReport::count(IssueKind kind) const noexcept {
    return static_cast<std::size_t>(
        std::count_if(issues.begin(), issues.end(), [&](const Issue& i) { return i.kind == kind; }));
}

void ValidationReport::append(const ValidationReport& other) {
    issues.insert(issues.end(), other.issues.begin(), other.issues.end());
}

std::string ValidationReport::to_text() const {
    std::ostringstream out;
    out << issues.size() << " issue(s)\n";
    for (const auto& i : issues) {
        out << to_string(i.kind);
        if (i.line) out << " line=" << i.line;
        if (!i.case_id.empty()) out << " case=" << i.case_id;
        if (!i.event_id.empty()) out << " event=" << i.event_id;
        if (!i.detail.empty()) out << ": " << i.detail;
        out << '\n';
    }
    return out.str();
}

nlohmann::json ValidationReport::to_json() const {
    auto list = nlohmann::json::array();
    for (const auto& i : issues) {
        list.push_back({{"kind", to_string(i.kind)},
                        {"case_id", i.case_id},
                        {"event_id", i.event_id},
                        {"line", i.line},
                        {"detail", i.detail}});
    }
    return {{"summary", summary()}, {"issues", std::move(list)}};
}

nlohmann::json ValidationReport::summary() const {
    std::map<std::string, std::size_t> counts;
    for (const auto& i : issues) ++counts[std::string(to_string(i.kind))];
    nlohmann::json out = {{"total", issues.size()}};
    for (const auto& [k, v] : counts) out[k] = v;
    return out;
}

ParseResult parse_csv(std::istream& in, const SchemaMapping& schema, ParseOptions options,
                      std::string source_name) {
    csv::Reader reader(in, schema.delimiter);
    std::vector<std::string> header;
    if (!reader.next(header)) throw SchemaError("missing header row");
    for (auto& h : header) h = std::string(csv::trim(h));

    auto find_col = [&](const std::string& name) -> std::optional<std::size_t> {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) return std::nullopt;
        return static_cast<std::size_t>(it - header.begin());
    };
    auto require = [&](const std::string& name) {
        auto c = find_col(name);
        if (!c) throw SchemaError("header lacks mapped column '" + name + "'");
        return *c;
    };
    auto require_opt = [&](const std::optional<std::string>& name) -> std::optional<std::size_t> {
        if (!name) return std::nullopt;
        return require(*name);
    };

    const std::size_t c_case = require(schema.case_id_col);
    const std::size_t c_time = require(schema.timestamp_col);
    const std::size_t c_act = require(schema.activity_col);
    const auto c_event = require_opt(schema.event_id_col);
    const auto c_res = require_opt(schema.resource_col);
    const auto c_city = require_opt(schema.city_col);
    const auto c_loc = require_opt(schema.location_col);

    std::vector<std::size_t> mapped = {c_case, c_time, c_act};
    for (auto c : {c_event, c_res, c_city, c_loc})
        if (c) mapped.push_back(*c);
    std::vector<std::string> extra_columns;
    std::vector<std::size_t> extra_idx;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (std::find(mapped.begin(), mapped.end(), i) == mapped.end()) {
            extra_columns.push_back(header[i]);
            extra_idx.push_back(i);
        }
    }

    const TimestampFormat fmt(schema.timestamp_format);
    ParseResult result;
    std::vector<Trace> traces;
    std::unordered_map<std::string, std::size_t> by_case;
    std::vector<std::string> fields;
    std::size_t data_rows = 0;

    auto reject = [&](IssueKind kind, std::string case_id, std::string event_id, std::string detail) {
        Issue issue{kind, std::move(case_id), std::move(event_id), reader.line(), std::move(detail)};
        if (options.strict) {
            throw DataError(std::string(to_string(kind)) + " at line " + std::to_string(issue.line) +
                            (issue.detail.empty() ? "" : ": " + issue.detail));
        }
        result.report.issues.push_back(std::move(issue));
        ++result.skipped_rows;
    };

    while (reader.next(fields)) {
        if (fields.size() == 1 && csv::trim(fields[0]).empty()) continue;
        const std::size_t row = data_rows++;
        if (fields.size() < header.size()) {
            reject(IssueKind::malformed_row, {}, {},
                   "expected " + std::to_string(header.size()) + " fields, got " + std::to_string(fields.size()));
            continue;
        }
        Event e;
        e.source_row = row;
        e.case_id = std::string(csv::trim(fields[c_case]));
        e.event_id = c_event ? std::string(csv::trim(fields[*c_event])) : std::to_string(row + 1);
        if (e.case_id.empty()) {
            reject(IssueKind::malformed_row, {}, e.event_id, "empty case id");
            continue;
        }
        auto ts = fmt.parse(fields[c_time]);
        if (!ts) {
            reject(IssueKind::malformed_timestamp, e.case_id, e.event_id, "'" + fields[c_time] + "'");
            continue;
        }
        e.timestamp = *ts;
        e.activity = std::string(csv::trim(fields[c_act]));
        if (c_res) e.resource = std::string(csv::trim(fields[*c_res]));
        if (c_city) e.city = std::string(csv::trim(fields[*c_city]));
        if (c_loc) {
            auto text = csv::trim(fields[*c_loc]);
            if (!text.empty()) {
                auto comma = text.find(',');
                std::optional<double> lat, lon;
                if (comma != std::string_view::npos) {
                    lat = to_double(text.substr(0, comma));
                    lon = to_double(text.substr(comma + 1));
                }
                if (!lat || !lon) {
                    reject(IssueKind::malformed_coordinate, e.case_id, e.event_id, "'" + std::string(text) + "'");
                    continue;
                }
                if (!Coordinate::valid(*lat, *lon)) {
                    reject(IssueKind::coordinate_out_of_range, e.case_id, e.event_id, "'" + std::string(text) + "'");
                    continue;
                }
                e.location = Coordinate{*lat, *lon};
            }
        }
        e.extra.reserve(extra_idx.size());
        for (auto i : extra_idx) e.extra.push_back(fields[i]);

        auto [it, inserted] = by_case.try_emplace(e.case_id, traces.size());
        if (inserted) traces.push_back(Trace{e.case_id, {}});
        traces[it->second].events.push_back(std::move(e));
    }

    result.log = EventLog(std::move(traces), schema, SourceMeta{std::move(source_name), data_rows},
                          std::move(extra_columns));
    return result;
}

ParseResult parse_csv(const std::filesystem::path& path, const SchemaMapping& schema, ParseOptions options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path.string());
    return parse_csv(in, schema, options, path.filename().string());
}

void write_csv(const EventLog& log, std::ostream& out) {
    const auto& s = log.schema();
    const char d = s.delimiter;
    const TimestampFormat fmt(s.timestamp_format);

    std::vector<std::string> header = {s.case_id_col};
    if (s.event_id_col) header.push_back(*s.event_id_col);
    header.push_back(s.timestamp_col);
    header.push_back(s.activity_col);
    if (s.resource_col) header.push_back(*s.resource_col);
    if (s.city_col) header.push_back(*s.city_col);
    if (s.location_col) header.push_back(*s.location_col);
    for (const auto& c : log.extra_columns()) header.push_back(c);
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? std::string(1, d) : "") << csv::escape(header[i], d);
    out << '\n';

    std::string line;
    for (const auto& t : log.traces()) {
        for (const auto& e : t.events) {
            line.clear();
            auto put = [&](std::string_view v) {
                line.push_back(d);
                line += csv::escape(v, d);
            };
            line += csv::escape(e.case_id, d);
            if (s.event_id_col) put(e.event_id);
            put(fmt.format(e.timestamp));
            put(e.activity);
            if (s.resource_col) put(e.resource);
            if (s.city_col) put(e.city);
            if (s.location_col) put(e.location ? format_lat_lon(*e.location) : std::string());
            for (const auto& x : e.extra) put(x);
            out << line << '\n';
        }
    }
}

ValidationReport validate(const EventLog& log) {
    ValidationReport report;
    std::unordered_map<std::string_view, std::size_t> seen_ids;
    for (const auto& t : log.traces()) {
        if (t.events.size() == 1)
            report.issues.push_back({IssueKind::single_event_trace, t.case_id, t.events[0].event_id, 0, {}});

        // Source order is recoverable from source_row; a decrease in timestamp
        // along it means the rows were out of order before sorting.
        std::vector<const Event*> raw;
        raw.reserve(t.events.size());
        for (const auto& e : t.events) raw.push_back(&e);
        std::sort(raw.begin(), raw.end(), [](const Event* a, const Event* b) { return a->source_row < b->source_row; });
        for (std::size_t i = 1; i < raw.size(); ++i) {
            if (raw[i]->timestamp < raw[i - 1]->timestamp) {
                report.issues.push_back({IssueKind::reordered_trace, t.case_id, {}, 0,
                                         "rows not in chronological order; trace was re-sorted"});
                break;
            }
        }

        for (const auto& e : t.events) {
            if (!e.location)
                report.issues.push_back({IssueKind::missing_location, t.case_id, e.event_id, 0, e.city});
            if (++seen_ids[e.event_id] == 2)
                report.issues.push_back({IssueKind::duplicate_event_id, t.case_id, e.event_id, 0, {}});
        }
    }
    return report;
}

GeocodeResult geocode(const EventLog& log, const Gazetteer& gazetteer, bool strict) {
    GeocodeResult result;
    std::vector<Trace> traces = log.traces();
    for (auto& t : traces) {
        for (auto& e : t.events) {
            if (e.location) continue;
            if (const Place* p = gazetteer.find(e.city, Level::city)) {
                e.location = p->coord;
                continue;
            }
            if (strict) throw DataError("city '" + e.city + "' not found in gazetteer");
            result.report.issues.push_back({IssueKind::unresolved_city, t.case_id, e.event_id, 0, e.city});
        }
    }
    result.log = log.with_traces(std::move(traces));
    return result;
}

} // namespace geomine
