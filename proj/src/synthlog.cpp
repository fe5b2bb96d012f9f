#include "geomine/synthlog.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <unordered_map>

#include "geomine/error.hpp"

namespace geomine {

namespace {

constexpr std::int64_t kMinute = 60;

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::int64_t floor_minutes(std::int64_t s) {
    return (s >= 0 ? s / kMinute : (s - kMinute + 1) / kMinute) * kMinute;
}

struct BenchCity {
    const char* name;
    const char* province;
    double lat, lon;
};

// Approximate provincial capitals; the benchmark only needs plausible geometry.
constexpr BenchCity kCities[] = {
    {"Tehran", "Tehran", 35.6892, 51.3890},        {"Mashhad", "Razavi Khorasan", 36.2605, 59.6168},
    {"Isfahan", "Isfahan", 32.6546, 51.6680},      {"Shiraz", "Fars", 29.5918, 52.5837},
    {"Tabriz", "East Azerbaijan", 38.0800, 46.2919}, {"Ahvaz", "Khuzestan", 31.3183, 48.6706},
    {"Qom", "Qom", 34.6416, 50.8746},              {"Kermanshah", "Kermanshah", 34.3142, 47.0650},
    {"Urmia", "West Azerbaijan", 37.5527, 45.0760}, {"Rasht", "Gilan", 37.2808, 49.5832},
    {"Zahedan", "Sistan and Baluchestan", 29.4963, 60.8629}, {"Hamadan", "Hamadan", 34.7989, 48.5146},
    {"Kerman", "Kerman", 30.2839, 57.0834},        {"Yazd", "Yazd", 31.8974, 54.3569},
    {"Ardabil", "Ardabil", 38.2498, 48.2933},      {"Bandar Abbas", "Hormozgan", 27.1832, 56.2666},
    {"Arak", "Markazi", 34.0917, 49.6892},         {"Zanjan", "Zanjan", 36.6736, 48.4787},
    {"Sanandaj", "Kurdistan", 35.3219, 46.9862},   {"Qazvin", "Qazvin", 36.2797, 50.0049},
    {"Khorramabad", "Lorestan", 33.4878, 48.3558}, {"Gorgan", "Golestan", 36.8427, 54.4353},
    {"Sari", "Mazandaran", 36.5633, 53.0601},      {"Bushehr", "Bushehr", 28.9234, 50.8203},
    {"Birjand", "South Khorasan", 32.8663, 59.2211}, {"Ilam", "Ilam", 33.6374, 46.4227},
    {"Shahrekord", "Chaharmahal and Bakhtiari", 32.3256, 50.8644},
    {"Yasuj", "Kohgiluyeh and Boyer-Ahmad", 30.6682, 51.5880},
    {"Semnan", "Semnan", 35.5769, 53.3950},        {"Bojnurd", "North Khorasan", 37.4747, 57.3290},
    {"Karaj", "Alborz", 35.8400, 50.9391},
};

} // namespace

void NetworkConfig::validate() const {
    if (routes.empty()) throw ConfigError("network config needs at least one route");
    auto g = gazetteer();
    for (const auto& r : routes) {
        if (r.stops.size() < 2) throw ConfigError("a route needs at least two stops");
        if (!(r.weight > 0) || !std::isfinite(r.weight)) throw ConfigError("route weights must be positive");
        for (const auto& s : r.stops)
            if (!g.find(s, Level::city)) throw ConfigError("route stop '" + s + "' is not a city-level place");
    }
    if (!(inter_hop_duration.mean_s > 0) || inter_hop_duration.jitter_s < 0)
        throw ConfigError("inter_hop_duration needs mean_s > 0 and jitter_s >= 0");
    if (case_interval_s < 0) throw ConfigError("case_interval_s must be non-negative");
}

Gazetteer NetworkConfig::gazetteer() const {
    try {
        return Gazetteer::build(places);
    } catch (const HierarchyError& e) {
        throw ConfigError(std::string("network places: ") + e.what());
    }
}

double NetworkConfig::expected_events_per_case() const {
    double total = 0.0, weighted = 0.0;
    for (const auto& r : routes) {
        total += r.weight;
        weighted += r.weight * static_cast<double>(2 * r.stops.size() + 1);
    }
    return total > 0 ? weighted / total : 0.0;
}

NetworkConfig NetworkConfig::from_json(const nlohmann::json& doc) {
    try {
        NetworkConfig c;
        for (const auto& p : doc.at("places")) {
            Gazetteer::Row row;
            row.name = p.at("name").get<std::string>();
            auto level = parse_level(p.value("level", std::string("city")));
            if (!level) throw ConfigError("unknown level for place '" + row.name + "'");
            row.level = *level;
            row.parent = p.value("parent", std::string());
            row.coord = Coordinate::make(p.at("lat").get<double>(), p.at("lon").get<double>());
            c.places.push_back(std::move(row));
        }
        for (const auto& r : doc.at("routes")) {
            c.routes.push_back({r.at("stops").get<std::vector<std::string>>(), r.value("weight", 1.0)});
        }
        c.cases = doc.value("cases", std::size_t{0});
        c.seed = doc.value("seed", std::uint64_t{0});
        if (doc.contains("time_origin")) {
            auto t = parse_iso_instant(doc.at("time_origin").get<std::string>());
            if (!t) throw ConfigError("time_origin must be yyyy-MM-dd or yyyy-MM-ddTHH:mm:ss");
            c.time_origin = *t;
        }
        c.case_interval_s = doc.value("case_interval_s", c.case_interval_s);
        if (doc.contains("inter_hop_duration")) {
            const auto& d = doc.at("inter_hop_duration");
            c.inter_hop_duration.mean_s = d.value("mean_s", c.inter_hop_duration.mean_s);
            c.inter_hop_duration.jitter_s = d.value("jitter_s", c.inter_hop_duration.jitter_s);
        }
        c.validate();
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("network config: ") + e.what());
    }
}

nlohmann::json NetworkConfig::to_json() const {
    auto ps = nlohmann::json::array();
    for (const auto& p : places) {
        ps.push_back({{"name", p.name}, {"level", to_string(p.level)}, {"parent", p.parent},
                      {"lat", p.coord.lat}, {"lon", p.coord.lon}});
    }
    auto rs = nlohmann::json::array();
    for (const auto& r : routes) rs.push_back({{"stops", r.stops}, {"weight", r.weight}});
    return {{"places", ps},
            {"routes", rs},
            {"cases", cases},
            {"seed", seed},
            {"time_origin", format_iso(time_origin)},
            {"case_interval_s", case_interval_s},
            {"inter_hop_duration", {{"mean_s", inter_hop_duration.mean_s}, {"jitter_s", inter_hop_duration.jitter_s}}}};
}

NetworkConfig load_network_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open network config " + path.string());
    try {
        return NetworkConfig::from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("network config: ") + e.what());
    }
}

EventLog generate(const NetworkConfig& config) {
    config.validate();
    const auto g = config.gazetteer();

    struct StopInfo {
        std::string city;
        std::string office;
        Coordinate coord;
    };
    std::unordered_map<std::string, std::string> office_of;
    for (const auto& p : g.places()) {
        if (p.level == Level::office && p.parent) office_of.try_emplace(g.at(*p.parent).name, p.name);
    }
    std::vector<std::vector<StopInfo>> routes;
    std::vector<double> cumulative;
    double total = 0.0;
    for (const auto& r : config.routes) {
        std::vector<StopInfo> stops;
        for (const auto& s : r.stops) {
            const Place* city = g.find(s, Level::city);
            auto it = office_of.find(s);
            stops.push_back({s, it != office_of.end() ? it->second : "P.O. " + s, city->coord});
        }
        routes.push_back(std::move(stops));
        total += r.weight;
        cumulative.push_back(total);
    }

    std::mt19937_64 rng(config.seed);
    auto gap = [&] {
        const auto& d = config.inter_hop_duration;
        double s = d.mean_s;
        if (d.jitter_s > 0) s += d.jitter_s * (2.0 * uniform01(rng) - 1.0);
        auto minutes = static_cast<std::int64_t>(std::llround(s / kMinute));
        return std::max<std::int64_t>(minutes, 1) * kMinute;
    };

    const std::int64_t origin = floor_minutes(config.time_origin.time_since_epoch().count());
    const std::int64_t interval = floor_minutes(config.case_interval_s);
    std::vector<Trace> traces;
    traces.reserve(config.cases);
    std::size_t next_event = 1;
    for (std::size_t c = 0; c < config.cases; ++c) {
        const double r = uniform01(rng) * total;
        std::size_t ri = 0;
        while (ri + 1 < cumulative.size() && r >= cumulative[ri]) ++ri;
        const auto& stops = routes[ri];

        Trace t{std::to_string(c + 1), {}};
        t.events.reserve(2 * stops.size() + 1);
        std::int64_t now = origin + static_cast<std::int64_t>(c) * interval;
        bool first = true;
        auto emit = [&](std::string_view act, const StopInfo& at, std::string resource) {
            if (!first) now += gap();
            first = false;
            Event e;
            e.event_id = std::to_string(next_event++);
            e.case_id = t.case_id;
            e.timestamp = Instant{std::chrono::seconds{now}};
            e.activity = std::string(act);
            e.resource = std::move(resource);
            e.city = at.city;
            e.location = at.coord;
            e.source_row = next_event - 2;
            t.events.push_back(std::move(e));
        };
        emit(activity::pickup, stops.front(), stops.front().office);
        emit(activity::check_out, stops.front(), stops.front().office);
        for (std::size_t k = 1; k < stops.size(); ++k) {
            emit(activity::check_in, stops[k], stops[k].office);
            emit(activity::check_out, stops[k], stops[k].office);
        }
        emit(activity::delivery, stops.back(), "Postman " + std::to_string(c % 50 + 1));
        traces.push_back(std::move(t));
    }
    return EventLog(std::move(traces), SchemaMapping{}, SourceMeta{"generated", next_event - 1});
}

NetworkConfig scale_config_to_target(NetworkConfig base, std::size_t events_target) {
    if (events_target == 0) throw ConfigError("events target must be positive");
    base.validate();
    const double per_case = base.expected_events_per_case();
    base.cases = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(static_cast<double>(events_target) / per_case)));
    return base;
}

NetworkConfig benchmark_network() {
    NetworkConfig c;
    c.places.push_back({"Iran", Level::country, "", Coordinate{32.4279, 53.6880}});
    std::vector<std::string> provinces;
    for (const auto& city : kCities) {
        if (std::find(provinces.begin(), provinces.end(), city.province) == provinces.end()) {
            provinces.push_back(city.province);
            c.places.push_back({city.province, Level::province, "Iran", Coordinate{city.lat, city.lon}});
        }
    }
    int office = 100;
    for (const auto& city : kCities) {
        c.places.push_back({city.name, Level::city, city.province, Coordinate{city.lat, city.lon}});
        c.places.push_back({"P.O. " + std::to_string(office++), Level::office, city.name, Coordinate{city.lat, city.lon}});
    }
    c.routes = {
        {{"Rasht", "Sari", "Gorgan"}, 7.0},
        {{"Rasht", "Qazvin", "Tehran", "Semnan", "Gorgan"}, 2.0},
        {{"Rasht", "Tehran", "Sari", "Gorgan"}, 1.0},
        {{"Mashhad", "Tehran", "Shiraz"}, 6.0},
        {{"Mashhad", "Semnan", "Tehran", "Isfahan", "Shiraz"}, 2.0},
        {{"Tehran", "Tabriz"}, 5.0},
        {{"Tehran", "Qom", "Isfahan", "Yazd", "Kerman"}, 3.0},
        {{"Tabriz", "Urmia"}, 2.0},
        {{"Ahvaz", "Khorramabad", "Arak", "Tehran"}, 3.0},
        {{"Bandar Abbas", "Kerman", "Zahedan"}, 1.5},
        {{"Shiraz", "Bushehr"}, 2.0},
        {{"Tehran", "Karaj", "Qazvin", "Zanjan", "Ardabil"}, 2.5},
        {{"Kermanshah", "Hamadan", "Tehran"}, 2.0},
        {{"Sanandaj", "Kermanshah", "Ilam"}, 1.0},
        {{"Isfahan", "Shahrekord", "Yasuj"}, 1.0},
        {{"Mashhad", "Bojnurd", "Gorgan"}, 1.5},
        {{"Birjand", "Mashhad"}, 1.0},
        {{"Yazd", "Isfahan", "Arak", "Hamadan"}, 1.0},
        {{"Tehran", "Mashhad"}, 4.0},
        {{"Karaj", "Tehran", "Qom"}, 2.0},
    };
    c.seed = 1137643;
    c.time_origin = *parse_iso_instant("2017-05-01T00:00:00");
    c.case_interval_s = 60;
    c.inter_hop_duration = {6 * 3600.0, 3 * 3600.0};
    return c;
}

NetworkConfig scale_benchmark_config(std::size_t events_target) {
    return scale_config_to_target(benchmark_network(), events_target);
}

} // namespace geomine
