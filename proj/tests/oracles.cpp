#include "oracles.hpp"

#include <array>
#include <cmath>

namespace oracle {

double great_circle_km(double lat1, double lon1, double lat2, double lon2) {
    const double k = 3.14159265358979323846 / 180.0;
    auto vec = [&](double lat, double lon) {
        return std::array<double, 3>{std::cos(lat * k) * std::cos(lon * k), std::cos(lat * k) * std::sin(lon * k),
                                     std::sin(lat * k)};
    };
    auto a = vec(lat1, lon1);
    auto b = vec(lat2, lon2);
    const double cx = a[1] * b[2] - a[2] * b[1];
    const double cy = a[2] * b[0] - a[0] * b[2];
    const double cz = a[0] * b[1] - a[1] * b[0];
    const double cross = std::sqrt(cx * cx + cy * cy + cz * cz);
    const double dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    return 6371.0 * std::atan2(cross, dot);
}

std::string label_of(const geomine::Event& e, const std::string& dim) {
    std::string v = dim == "activity" ? e.activity : dim == "resource" ? e.resource : e.city;
    return v.empty() ? "<unknown>" : v;
}

std::vector<std::string> labels(const geomine::Trace& t, const std::string& dim, bool collapse) {
    std::vector<std::string> out;
    for (const auto& e : t.events) {
        auto l = label_of(e, dim);
        if (collapse && !out.empty() && out.back() == l) continue;
        out.push_back(l);
    }
    return out;
}

EdgeCounts edge_counts(const geomine::EventLog& log, const std::string& dim, bool collapse) {
    EdgeCounts out;
    for (const auto& t : log.traces()) {
        auto ls = labels(t, dim, collapse);
        for (std::size_t i = 1; i < ls.size(); ++i) out[{ls[i - 1], ls[i]}] += 1;
    }
    return out;
}

EdgeCounts edge_case_counts(const geomine::EventLog& log, const std::string& dim, bool collapse) {
    EdgeCounts out;
    for (const auto& t : log.traces()) {
        auto ls = labels(t, dim, collapse);
        std::set<std::pair<std::string, std::string>> seen;
        for (std::size_t i = 1; i < ls.size(); ++i) seen.insert({ls[i - 1], ls[i]});
        for (const auto& p : seen) out[p] += 1;
    }
    return out;
}

std::map<std::string, std::size_t> visit_counts(const geomine::EventLog& log, const std::string& dim, bool collapse) {
    std::map<std::string, std::size_t> out;
    for (const auto& t : log.traces())
        for (const auto& l : labels(t, dim, collapse)) out[l] += 1;
    return out;
}

std::multiset<std::string> endpoint_cases(const geomine::EventLog& log, const std::string& dim,
                                          const std::string& source, const std::string& destination) {
    std::multiset<std::string> out;
    for (const auto& t : log.traces()) {
        auto ls = labels(t, dim, true);
        if (ls.front() == source && ls.back() == destination) out.insert(t.case_id);
    }
    return out;
}

std::map<std::vector<std::string>, std::size_t> variant_counts(const geomine::EventLog& log, const std::string& dim) {
    std::map<std::vector<std::string>, std::size_t> out;
    for (const auto& t : log.traces()) out[labels(t, dim, true)] += 1;
    return out;
}

geomine::EventLog random_log(std::mt19937_64& rng, std::size_t max_cases, std::size_t max_events) {
    static const std::vector<std::string> cities = {"A", "B", "C", "D", "E"};
    static const std::vector<std::string> acts = {"pickup", "check-in", "check-out", "delivery"};
    static const std::vector<std::pair<double, double>> coords = {
        {35.0, 51.0}, {36.3, 59.6}, {29.6, 52.6}, {38.1, 46.3}, {31.3, 48.7}};
    auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };

    const std::size_t cases = pick(max_cases + 1);
    std::vector<geomine::Trace> traces;
    std::size_t event_id = 1;
    for (std::size_t c = 0; c < cases; ++c) {
        geomine::Trace t{"c" + std::to_string(c), {}};
        const std::size_t n = 1 + pick(max_events);
        std::int64_t now = 1495700000 + static_cast<std::int64_t>(pick(100000));
        for (std::size_t i = 0; i < n; ++i) {
            geomine::Event e;
            e.case_id = t.case_id;
            e.event_id = std::to_string(event_id++);
            now += static_cast<std::int64_t>(pick(4)) * 3600; // zero gaps create ties
            e.timestamp = geomine::Instant{std::chrono::seconds{now}};
            e.activity = acts[pick(acts.size())];
            const auto ci = pick(cities.size());
            e.city = pick(10) == 0 ? std::string() : cities[ci];
            e.resource = "P.O. " + std::to_string(ci);
            if (pick(5) != 0) e.location = geomine::Coordinate{coords[ci].first, coords[ci].second};
            e.source_row = event_id - 2;
            t.events.push_back(std::move(e));
        }
        traces.push_back(std::move(t));
    }
    return geomine::EventLog(std::move(traces), geomine::SchemaMapping{});
}

} // namespace oracle
