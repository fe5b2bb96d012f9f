// Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on any FAIL.

#include <sys/resource.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "format_checks.hpp"
#include "geomine/cli.hpp"
#include "geomine/discovery.hpp"
#include "geomine/export.hpp"
#include "geomine/metrics.hpp"
#include "geomine/pipeline.hpp"
#include "geomine/server.hpp"
#include "geomine/stable_json.hpp"
#include "geomine/synthlog.hpp"
#include "oracles.hpp"
#include "test_common.hpp"

using namespace geomine;
using Clock = std::chrono::steady_clock;

namespace {

/// Collects failures for one criterion.
class Check {
public:
    void expect(bool ok, const std::string& what) {
        if (!ok && failures_.size() < 5) failures_.push_back(what);
        if (!ok) ++count_;
    }
    bool ok() const { return count_ == 0; }
    std::string summary() const {
        std::string s = std::to_string(count_) + " failure(s)";
        for (const auto& f : failures_) s += "; " + f;
        return s;
    }

private:
    std::vector<std::string> failures_;
    std::size_t count_ = 0;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double peak_rss_mb() {
    rusage usage{};
    getrusage(RUSAGE_SELF, &usage);
    return static_cast<double>(usage.ru_maxrss) / 1024.0; // kilobytes on Linux
}

std::string fmt(const char* pattern, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, v);
    return buf;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Outcome {
    bool pass;
    std::string detail;
};

// --- criteria ---------------------------------------------------------------

Outcome reference_golden() {
    Check c;
    const auto t0 = Clock::now();
    const auto log = testing_support::reference_log();
    const auto map = annotate_distances(discover(log, Dimension::city(), true)).map;
    const double elapsed = seconds_since(t0);

    std::set<std::string> nodes;
    for (const auto& n : map.nodes) nodes.insert(n.label);
    c.expect(nodes == std::set<std::string>{"Mashhad", "Tehran", "Shiraz"}, "node set");
    c.expect(map.edges.size() == 2, "edge count");
    const auto* a = map.find_edge("Mashhad", "Tehran");
    const auto* b = map.find_edge("Tehran", "Shiraz");
    c.expect(a && a->frequency == 1, "Mashhad->Tehran freq");
    c.expect(b && b->frequency == 1, "Tehran->Shiraz freq");
    if (a && b) {
        c.expect(a->durations.min_s == 65460 && a->durations.max_s == 65460 && a->durations.mean_s == 65460.0,
                 "Mashhad->Tehran duration");
        c.expect(b->durations.min_s == 65220 && b->durations.max_s == 65220 && b->durations.mean_s == 65220.0,
                 "Tehran->Shiraz duration");
        c.expect(a->distance_km && std::abs(*a->distance_km - 82.9) <= 0.1, "Mashhad->Tehran distance");
        c.expect(b->distance_km && std::abs(*b->distance_km - 556.6) <= 0.5, "Tehran->Shiraz distance");
    }
    c.expect(elapsed < 1.0, "runtime");
    std::string detail = "runtime " + fmt("%.4f", elapsed) + " s";
    if (a && b && a->distance_km && b->distance_km)
        detail += ", distances " + fmt("%.3f", *a->distance_km) + " / " + fmt("%.3f", *b->distance_km) + " km";
    return {c.ok(), c.ok() ? detail : c.summary()};
}

Outcome activity_parity() {
    Check c;
    const auto log = testing_support::reference_log();
    const auto map = discover(log, Dimension::activity(), false);
    // Short names against the log's activity wording.
    const std::map<std::string, std::string> name = {{"Parcel pickup", "pickup"},
                                                     {"Parcel check-out", "check-out"},
                                                     {"Parcel check in", "check-in"},
                                                     {"Parcel Delivery", "delivery"}};
    std::map<std::pair<std::string, std::string>, std::size_t> got;
    for (const auto& e : map.edges) {
        c.expect(name.count(e.source) && name.count(e.target), "unexpected label " + e.source + " / " + e.target);
        if (name.count(e.source) && name.count(e.target)) got[{name.at(e.source), name.at(e.target)}] = e.frequency;
    }
    const std::map<std::pair<std::string, std::string>, std::size_t> expected = {
        {{"pickup", "check-out"}, 1}, {{"check-out", "check-in"}, 2}, {{"check-in", "check-out"}, 2},
        {{"check-out", "delivery"}, 1}};
    c.expect(got == expected, "edge multiset");
    const auto brute = oracle::edge_counts(log, "activity", false);
    std::map<std::pair<std::string, std::string>, std::size_t> brute_short;
    for (const auto& [k, v] : brute) brute_short[{name.at(k.first), name.at(k.second)}] = v;
    c.expect(brute_short == got, "brute-force agreement");
    return {c.ok(), c.ok() ? "4 edges, multiset exact" : c.summary()};
}

Outcome oracle_equivalence() {
    Check c;
    std::mt19937_64 rng(20170525);
    std::size_t total_events = 0;
    for (int i = 0; i < 100; ++i) {
        const auto log = oracle::random_log(rng, 50, 10);
        total_events += log.event_count();
        const std::string tag = "log " + std::to_string(i);
        for (const auto& [dim, dn] : {std::pair{Dimension::activity(), "activity"}, std::pair{Dimension::city(), "city"},
                                      std::pair{Dimension::resource(), "resource"}}) {
            for (bool collapse : {false, true}) {
                const auto map = discover(log, dim, collapse);
                oracle::EdgeCounts got, got_cases;
                for (const auto& e : map.edges) {
                    got[{e.source, e.target}] = e.frequency;
                    got_cases[{e.source, e.target}] = e.case_frequency;
                }
                c.expect(got == oracle::edge_counts(log, dn, collapse), tag + " edges " + dn);
                c.expect(got_cases == oracle::edge_case_counts(log, dn, collapse), tag + " case counts " + dn);
                std::map<std::string, std::size_t> visits;
                for (const auto& n : map.nodes) visits[n.label] = n.visit_count;
                c.expect(visits == oracle::visit_counts(log, dn, collapse), tag + " visits " + dn);

                std::size_t freq = 0, steps = 0;
                for (const auto& e : map.edges) freq += e.frequency;
                for (const auto& p : project(log, dim, collapse)) steps += p.steps.size() - 1;
                c.expect(freq == steps, tag + " conservation");
                if (!collapse) c.expect(freq == log.event_count() - log.case_count(), tag + " raw conservation");
            }
        }
        for (const char* s : {"A", "B", "C", "D", "E", "<unknown>"}) {
            for (const char* d : {"A", "B", "C", "D", "E", "<unknown>"}) {
                std::multiset<std::string> got;
                const auto kept = filter_endpoints(log, Dimension::city(), s, d);
                for (const auto& t : kept.traces()) got.insert(t.case_id);
                c.expect(got == oracle::endpoint_cases(log, "city", s, d), tag + " endpoints");
            }
        }
        for (const auto& [dim, dn] : {std::pair{Dimension::activity(), "activity"}, std::pair{Dimension::city(), "city"}}) {
            std::map<std::vector<std::string>, std::size_t> got;
            for (const auto& v : variants(log, dim)) got[v.path] = v.case_count;
            c.expect(got == oracle::variant_counts(log, dn), tag + " variants " + dn);
        }
    }
    return {c.ok(), c.ok() ? "100 logs, " + std::to_string(total_events) + " events, all exact" : c.summary()};
}

Outcome geodesy() {
    Check c;
    std::mt19937_64 rng(6371);
    std::uniform_real_distribution<double> lat(-90.0, 90.0), lon(-180.0, 180.0);
    auto random_point = [&] { return Coordinate::make(lat(rng), lon(rng)); };

    double worst_triangle = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const auto a = random_point(), b = random_point(), m = random_point();
        const double ab = haversine_km(a, b), am = haversine_km(a, m), mb = haversine_km(m, b);
        c.expect(ab == haversine_km(b, a), "symmetry");
        c.expect(haversine_km(a, a) == 0.0, "identity");
        const double excess = (ab - (am + mb)) / std::max(ab, 1e-300);
        worst_triangle = std::max(worst_triangle, excess);
        c.expect(ab <= (am + mb) * (1 + 1e-6), "triangle inequality");
    }

    // Fifty fixed pairs: the reference log legs, a few landmarks, and seeded points.
    std::vector<std::pair<Coordinate, Coordinate>> pairs = {
        {Coordinate::make(37.758889, 45.978333), Coordinate::make(37.555278, 45.0725)},
        {Coordinate::make(37.555278, 45.0725), Coordinate::make(35.8400188, 50.9390906)},
        {Coordinate::make(35.6892, 51.3890), Coordinate::make(36.2605, 59.6168)},
        {Coordinate::make(0, 0), Coordinate::make(0, 90)},
        {Coordinate::make(51.4779, -0.0015), Coordinate::make(40.6892, -74.0445)},
        {Coordinate::make(-33.8568, 151.2153), Coordinate::make(35.6586, 139.7454)},
        {Coordinate::make(89.0, 10.0), Coordinate::make(89.0, -170.0)},
        {Coordinate::make(10.0, 179.9), Coordinate::make(10.0, -179.9)},
    };
    std::mt19937_64 fixed(50);
    std::uniform_real_distribution<double> flat(-60.0, 60.0), flon(-120.0, 120.0);
    while (pairs.size() < 50) pairs.push_back({Coordinate::make(flat(fixed), flon(fixed)), Coordinate::make(flat(fixed), flon(fixed))});
    double worst_rel = 0.0;
    for (const auto& [p, q] : pairs) {
        const double got = haversine_km(p, q);
        const double ref = oracle::great_circle_km(p.lat, p.lon, q.lat, q.lon);
        const double rel = std::abs(got - ref) / std::max(ref, 1e-300);
        worst_rel = std::max(worst_rel, rel);
        c.expect(rel <= 1e-9, "oracle pair " + fmt("%.6f", p.lat) + "," + fmt("%.6f", p.lon));
    }
    return {c.ok(), c.ok() ? "1000 triples, 50 pairs, worst oracle rel " + fmt("%.2e", worst_rel) : c.summary()};
}

NetworkConfig three_level_network(std::mt19937_64& rng, std::size_t cases) {
    NetworkConfig cfg;
    cfg.places.push_back({"Iran", Level::country, "", Coordinate::make(32.4, 53.7)});
    const std::vector<std::string> provinces = {"North", "South", "East"};
    for (std::size_t i = 0; i < provinces.size(); ++i)
        cfg.places.push_back({provinces[i], Level::province, "Iran", Coordinate::make(30.0 + 2.0 * i, 50.0 + i)});
    std::vector<std::string> cities;
    std::uniform_real_distribution<double> dlat(27.0, 38.0), dlon(45.0, 60.0);
    for (int i = 0; i < 9; ++i) {
        cities.push_back("City" + std::to_string(i));
        cfg.places.push_back({cities.back(), Level::city, provinces[i % 3], Coordinate::make(dlat(rng), dlon(rng))});
    }
    const std::size_t routes = 2 + rng() % 5;
    for (std::size_t r = 0; r < routes; ++r) {
        RouteSpec spec;
        const std::size_t stops = 2 + rng() % 4;
        std::vector<std::string> pool = cities;
        std::shuffle(pool.begin(), pool.end(), rng);
        spec.stops.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(stops));
        spec.weight = 1.0 + static_cast<double>(rng() % 5);
        cfg.routes.push_back(std::move(spec));
    }
    cfg.cases = cases;
    cfg.seed = rng();
    cfg.time_origin = *parse_iso_instant("2017-05-01");
    return cfg;
}

Outcome aggregation() {
    Check c;
    std::mt19937_64 rng(3);
    for (int i = 0; i < 20; ++i) {
        const auto cfg = three_level_network(rng, 50 + rng() % 200);
        const auto log = generate(cfg);
        const auto g = cfg.gazetteer();
        const std::string tag = "log " + std::to_string(i);
        for (auto level : {Level::city, Level::province, Level::country}) {
            const auto r = aggregate(log, g, level, false);
            c.expect(r.report.empty(), tag + " unresolved at " + std::string(to_string(level)));
            c.expect(r.map.trace_count == log.case_count(), tag + " case count");
            std::size_t visits = 0;
            for (const auto& n : r.map.nodes) visits += n.visit_count;
            c.expect(visits == log.event_count(), tag + " visit count at " + std::string(to_string(level)));
        }
        const auto country = aggregate(log, g, Level::country, true).map;
        c.expect(country.nodes.size() == 1 && country.edges.empty(), tag + " country map");
    }
    return {c.ok(), c.ok() ? "20 logs x 3 levels, counts preserved" : c.summary()};
}

Outcome generator_fidelity() {
    Check c;
    auto cfg = benchmark_network();
    cfg.cases = 10000;
    const auto log = generate(cfg);

    std::set<std::vector<std::string>> configured;
    std::map<std::vector<std::string>, double> weight;
    double total = 0.0;
    for (const auto& r : cfg.routes) {
        configured.insert(r.stops);
        weight[r.stops] += r.weight;
        total += r.weight;
    }
    std::map<std::vector<std::string>, std::size_t> counts;
    for (const auto& v : variants(log, Dimension::city())) counts[v.path] = v.case_count;
    std::set<std::vector<std::string>> seen;
    for (const auto& [p, _] : counts) seen.insert(p);
    c.expect(seen == configured, "variant set");

    double worst_z = 0.0;
    for (const auto& [path, w] : weight) {
        const double p = w / total, n = static_cast<double>(cfg.cases);
        const double z = std::abs(static_cast<double>(counts[path]) - n * p) / std::sqrt(n * p * (1 - p));
        worst_z = std::max(worst_z, z);
        c.expect(z <= 3.0, "proportion of route starting " + path.front());
    }

    // A smaller random network too: any generated log recovers its routes.
    std::mt19937_64 rng(11);
    for (int i = 0; i < 5; ++i) {
        const auto small = three_level_network(rng, 400);
        std::set<std::vector<std::string>> want, got;
        for (const auto& r : small.routes) want.insert(r.stops);
        for (const auto& v : variants(generate(small), Dimension::city())) got.insert(v.path);
        // Routes drawn zero times cannot appear; 400 cases make that vanishingly rare.
        c.expect(got == want, "random network route set");
    }

    std::ostringstream a, b;
    write_csv(log, a);
    write_csv(generate(cfg), b);
    c.expect(a.str() == b.str(), "same-seed bytes");
    return {c.ok(), c.ok() ? "20 routes recovered, worst |z| " + fmt("%.2f", worst_z) + ", byte-identical" : c.summary()};
}

Outcome performance() {
    Check c;
    const auto t_gen = Clock::now();
    const auto log = generate(scale_benchmark_config(1000000));
    const double gen_s = seconds_since(t_gen);
    const auto events = log.event_count();
    c.expect(std::abs(static_cast<double>(events) - 1e6) <= 5e4, "event count " + std::to_string(events));

    const auto t0 = Clock::now();
    const auto map = annotate_distances(discover(log, Dimension::city(), true)).map;
    const auto layers = to_geojson(map);
    const auto nodes = layers.nodes.to_string();
    const auto edges = layers.edges.to_string();
    const double elapsed = seconds_since(t0);
    const double rss = peak_rss_mb();
    c.expect(!nodes.empty() && !edges.empty() && map.trace_count == log.case_count(), "output");
    c.expect(elapsed < 30.0, "pipeline " + fmt("%.2f", elapsed) + " s");
    c.expect(rss < 4096.0, "peak RSS " + fmt("%.0f", rss) + " MB");
    const std::string detail = std::to_string(events) + " events, " + std::to_string(log.case_count()) +
                               " cases; generate " + fmt("%.2f", gen_s) + " s; discover+annotate+GeoJSON " +
                               fmt("%.2f", elapsed) + " s; peak RSS " + fmt("%.0f", rss) + " MB";
    return {c.ok(), c.ok() ? detail : c.summary() + " (" + detail + ")"};
}

Outcome format_conformance() {
    Check c;
    auto geojson_ok = [&](const std::string& text, const std::string& tag) {
        const auto problems = format_checks::geojson_problems(nlohmann::json::parse(text));
        c.expect(problems.empty(), tag + (problems.empty() ? "" : ": " + problems.front()));
    };
    std::size_t documents = 0, dots = 0;

    std::mt19937_64 rng(8);
    std::vector<EventLog> logs = {testing_support::reference_log()};
    for (int i = 0; i < 30; ++i) logs.push_back(oracle::random_log(rng, 30, 8));
    for (std::size_t i = 0; i < logs.size(); ++i) {
        const std::string tag = "log " + std::to_string(i);
        for (auto dim : {Dimension::city(), Dimension::activity()}) {
            for (bool collapse : {true, false}) {
                const auto map = annotate_distances(discover(logs[i], dim, collapse)).map;
                const auto layers = to_geojson(map);
                geojson_ok(layers.nodes.to_string(), tag + " nodes");
                geojson_ok(layers.edges.to_string(), tag + " edges");
                documents += 2;
                try {
                    const auto g = format_checks::parse_dot(to_dot(map));
                    c.expect(g.nodes.size() == map.nodes.size() && g.edges.size() == map.edges.size(), tag + " dot shape");
                } catch (const std::exception& e) {
                    c.expect(false, tag + " dot: " + e.what());
                }
                ++dots;
            }
        }
        if (!logs[i].empty()) {
            const auto frames = nlohmann::json::parse(
                dump_stable(frames_document(run_frames(logs[i], nullptr, MapQuery{}, 6 * 3600, false))));
            for (const auto& f : frames["frames"]) {
                geojson_ok(f["nodes"].dump(), tag + " frame nodes");
                geojson_ok(f["edges"].dump(), tag + " frame edges");
                documents += 2;
            }
        }
    }

    // CLI output against the HTTP API, byte for byte.
    ServerConfig sc;
    sc.gazetteer = testing_support::data_path("reference_gazetteer.csv");
    Service service(sc);
    HttpServer http(service);
    const int port = http.bind("127.0.0.1", 0);
    std::thread server([&] { http.listen_after_bind(); });
    http.wait_until_ready();
    httplib::Client client("127.0.0.1", port);

    testing_support::TempDir dir("acceptance");
    auto synth = benchmark_network();
    synth.cases = 300;
    std::ofstream(dir / "synth.csv") << [&] {
        std::ostringstream out;
        write_csv(generate(synth), out);
        return out.str();
    }();

    struct Case {
        std::string query;
        std::vector<std::string> flags;
    };
    const std::vector<Case> cases = {
        {"", {}},
        {"?dimension=activity", {"--dimension", "activity"}},
        {"?dimension=resource&collapse=false", {"--dimension", "resource", "--collapse", "false"}},
        {"?source=Mashhad&destination=Shiraz", {"--source", "Mashhad", "--destination", "Shiraz"}},
        {"?source=Tehran", {"--source", "Tehran"}},
        {"?level=province", {"--level", "province"}},
        {"?level=country&collapse=false", {"--level", "country", "--collapse", "false"}},
        {"?min_freq=2", {"--min-freq", "2"}},
        {"?from=2017-05-25&to=2017-05-26T00:00:00", {"--from", "2017-05-25", "--to", "2017-05-26T00:00:00"}},
        {"?from=2017-05-01&to=2017-05-02&min_freq=3", {"--from", "2017-05-01", "--to", "2017-05-02", "--min-freq", "3"}},
    };
    std::size_t compared = 0;
    for (const auto& file : {testing_support::data_path("reference_log.csv"), dir / "synth.csv"}) {
        auto posted = client.Post("/logs", slurp(file), "text/csv");
        c.expect(posted && posted->status == 201, "upload " + file.filename().string());
        if (!posted || posted->status != 201) continue;
        const std::string id = nlohmann::json::parse(posted->body)["log_id"];
        for (const auto& cs : cases) {
            std::vector<std::string> args = {"discover", file.string(), "--gazetteer", sc.gazetteer->string()};
            args.insert(args.end(), cs.flags.begin(), cs.flags.end());
            std::ostringstream out, err;
            const int code = run_cli(args, out, err);
            auto res = client.Get("/logs/" + id + "/map" + cs.query);
            if (code == 0) {
                c.expect(res && res->status == 200 && res->body + "\n" == out.str(),
                         file.filename().string() + " map" + cs.query);
                const auto doc = nlohmann::json::parse(out.str());
                geojson_ok(doc["nodes"].dump(), "cli nodes");
                geojson_ok(doc["edges"].dump(), "cli edges");
                documents += 2;
            } else {
                // Both sides must refuse the same request.
                c.expect(res && res->status >= 400, file.filename().string() + " error parity" + cs.query);
            }
            ++compared;
        }
        std::ostringstream vout, verr;
        run_cli({"variants", file.string(), "--gazetteer", sc.gazetteer->string(), "--format", "json"}, vout, verr);
        auto vres = client.Get("/logs/" + id + "/variants");
        c.expect(vres && vres->body + "\n" == vout.str(), "variants parity");
        std::ostringstream fout, ferr;
        run_cli({"frames", file.string(), "--gazetteer", sc.gazetteer->string(), "--bin-s", "86400"}, fout, ferr);
        auto fres = client.Get("/logs/" + id + "/frames?bin_s=86400");
        c.expect(fres && fres->body + "\n" == fout.str(), "frames parity");
        compared += 2;
    }
    http.stop();
    server.join();
    return {c.ok(), c.ok() ? std::to_string(documents) + " GeoJSON documents, " + std::to_string(dots) +
                                 " DOT graphs, " + std::to_string(compared) + " CLI/HTTP comparisons"
                           : c.summary()};
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"reference-log-golden-pipeline", reference_golden},
        {"activity-dimension-parity", activity_parity},
        {"oracle-equivalence", oracle_equivalence},
        {"geodesy-properties", geodesy},
        {"aggregation-invariants", aggregation},
        {"generator-fidelity", generator_fidelity},
        {"performance-1m-events", performance},
        {"format-conformance", format_conformance},
    };
    int failed = 0;
    for (const auto& [name, run] : criteria) {
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failed;
        std::cout << (o.pass ? "PASS " : "FAIL ") << name << " | " << o.detail << std::endl;
    }
    std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
    return failed == 0 ? 0 : 1;
}
