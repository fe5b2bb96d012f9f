#include "geomine/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "geomine/csv.hpp"
#include "geomine/error.hpp"
#include "geomine/pipeline.hpp"
#include "geomine/server.hpp"
#include "geomine/stable_json.hpp"
#include "geomine/synthlog.hpp"

namespace geomine {

namespace {

struct Options {
    std::string log_path;
    std::string schema_path;
    std::string gazetteer_path;
    std::string dimension = "city";
    std::string level;
    std::string collapse;
    std::string source;
    std::string destination;
    std::string from;
    std::string to;
    std::size_t min_freq = 0;
    std::string format;
    std::string out;
    bool strict = false;
    std::int64_t bin_s = 0;

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> cases;
    std::optional<std::size_t> events;

    std::string host = "127.0.0.1";
    int port = 8080;
    std::string layers_dir;
    std::string cors_origin = "*";
};

void add_input(CLI::App* cmd, Options& o) {
    cmd->add_option("log", o.log_path, "Event log CSV")->required();
    cmd->add_option("--schema", o.schema_path, "Schema mapping JSON (default: reference parcel log columns)");
    cmd->add_option("--gazetteer", o.gazetteer_path, "Gazetteer CSV (name,level,parent,lat,lon); geocodes the log");
    cmd->add_flag("--strict", o.strict, "Fail on malformed rows or unresolved places (exit 2)");
}

void add_filters(CLI::App* cmd, Options& o) {
    cmd->add_option("--dimension", o.dimension, "Node label: activity, city, resource or custom:<column>")
        ->capture_default_str();
    cmd->add_option("--level", o.level, "Aggregate by gazetteer level: office, city, province, country")
        ->check(CLI::IsMember({"office", "city", "province", "country"}));
    cmd->add_option("--collapse", o.collapse, "Merge consecutive repeated labels (default: false for activity, else true)")
        ->check(CLI::IsMember({"true", "false"}));
    cmd->add_option("--source", o.source, "Endpoints filter: first label of kept traces");
    cmd->add_option("--destination", o.destination, "Endpoints filter: last label of kept traces");
    cmd->add_option("--from", o.from, "Keep traces starting at or after (yyyy-MM-dd[THH:mm:ss], UTC)");
    cmd->add_option("--to", o.to, "Keep traces starting before (yyyy-MM-dd[THH:mm:ss], UTC)");
    cmd->add_option("--min-freq", o.min_freq, "Drop edges with lower frequency")->capture_default_str();
}

void add_output(CLI::App* cmd, Options& o, std::vector<std::string> formats) {
    std::string help = "Output format: " + formats.front() + " (default)";
    for (std::size_t i = 1; i < formats.size(); ++i) help += ", " + formats[i];
    cmd->add_option("--format", o.format, help)->check(CLI::IsMember(formats));
    cmd->add_option("--out", o.out, "Output file (default: stdout)");
}

std::map<std::string, std::string> params_of(const Options& o) {
    return {{"dimension", o.dimension}, {"level", o.level},   {"collapse", o.collapse},
            {"source", o.source},       {"destination", o.destination},
            {"from", o.from},           {"to", o.to},         {"min_freq", std::to_string(o.min_freq)}};
}

struct Loaded {
    EventLog log;
    Gazetteer gazetteer;
    ValidationReport report;
    std::size_t skipped = 0;
};

Loaded load(const Options& o) {
    SchemaMapping schema;
    if (!o.schema_path.empty()) {
        std::ifstream in(o.schema_path);
        if (!in) throw ConfigError("cannot open schema " + o.schema_path);
        try {
            schema = SchemaMapping::from_json(nlohmann::json::parse(in));
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(std::string("schema document: ") + e.what());
        }
    }
    if (!std::filesystem::is_regular_file(o.log_path)) throw ConfigError("no such log file: " + o.log_path);
    auto parsed = parse_csv(o.log_path, schema, ParseOptions{o.strict});
    Loaded l{std::move(parsed.log), {}, std::move(parsed.report), parsed.skipped_rows};
    if (!o.gazetteer_path.empty()) {
        l.gazetteer = load_gazetteer(o.gazetteer_path);
        auto geo = geocode(l.log, l.gazetteer, o.strict);
        l.log = std::move(geo.log);
        l.report.append(geo.report);
    }
    return l;
}

const Gazetteer* gaz(const Loaded& l) { return l.gazetteer.empty() ? nullptr : &l.gazetteer; }

void emit(const Options& o, const std::string& text, std::ostream& out) {
    if (o.out.empty()) {
        out << text;
        return;
    }
    std::ofstream f(o.out, std::ios::binary);
    if (!f) throw ConfigError("cannot write " + o.out);
    f << text;
}

std::string with_newline(std::string s) {
    s.push_back('\n');
    return s;
}

std::string fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

} // namespace

std::string edges_to_csv(const ProcessMap& map) {
    std::string out =
        "source,target,frequency,case_frequency,min_duration_s,median_duration_s,mean_duration_s,max_duration_s,"
        "distance_km,speed_kmh\n";
    for (const auto& e : map.edges) {
        const auto s = speed(e);
        out += csv::escape(e.source) + ',' + csv::escape(e.target) + ',' + std::to_string(e.frequency) + ',' +
               std::to_string(e.case_frequency) + ',' + std::to_string(e.durations.min_s) + ',' +
               fixed(std::round(e.durations.median_s), 0) + ',' + fixed(std::round(e.durations.mean_s), 0) + ',' +
               std::to_string(e.durations.max_s) + ',' + (e.distance_km ? fixed(*e.distance_km, 3) : "") + ',' +
               (s ? fixed(s.kmh, 3) : "") + '\n';
    }
    return out;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Geo-enabled process mining: discover, filter and export process maps from geo-tagged event logs",
                 "geomine"};
    app.require_subcommand(1);
    app.get_formatter()->column_width(52);
    Options o;

    auto* discover_cmd = app.add_subcommand("discover", "Discover the directly-follows process map");
    add_input(discover_cmd, o);
    add_filters(discover_cmd, o);
    add_output(discover_cmd, o, {"geojson", "dot", "csv", "json"});

    auto* variants_cmd = app.add_subcommand("variants", "List and assess route variants");
    add_input(variants_cmd, o);
    add_filters(variants_cmd, o);
    add_output(variants_cmd, o, {"csv", "json"});

    auto* frames_cmd = app.add_subcommand("frames", "Time-binned process maps (dynamic view)");
    add_input(frames_cmd, o);
    add_filters(frames_cmd, o);
    frames_cmd->add_option("--bin-s", o.bin_s, "Bin width in seconds")->required()->check(CLI::PositiveNumber);
    add_output(frames_cmd, o, {"geojson"});

    auto* export_cmd = app.add_subcommand("export", "Write the filtered (and geocoded) event log as CSV");
    add_input(export_cmd, o);
    add_filters(export_cmd, o);
    add_output(export_cmd, o, {"csv"});

    auto* generate_cmd = app.add_subcommand("generate", "Generate a synthetic parcel log");
    generate_cmd->add_option("--config", o.config_path, "Network config JSON (default: built-in benchmark network)");
    generate_cmd->add_option("--seed", o.seed, "Override the config seed");
    generate_cmd->add_option("--cases", o.cases, "Override the case count");
    generate_cmd->add_option("--events", o.events, "Scale the case count to about this many events");
    generate_cmd->add_option("--out", o.out, "Output file (default: stdout)");

    auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP API");
    serve_cmd->add_option("--host", o.host, "Listen address")->envname("GEOMINE_HOST")->capture_default_str();
    serve_cmd->add_option("--port", o.port, "Listen port")->envname("GEOMINE_PORT")->capture_default_str();
    serve_cmd->add_option("--gazetteer", o.gazetteer_path, "Gazetteer CSV used to geocode uploads")
        ->envname("GEOMINE_GAZETTEER");
    serve_cmd->add_option("--layers", o.layers_dir, "Directory of evidence layers (*.geojson)")
        ->envname("GEOMINE_LAYERS_DIR");
    serve_cmd->add_flag("--strict", o.strict, "Reject uploads with malformed rows (422)")->envname("GEOMINE_STRICT");
    serve_cmd->add_option("--cors-origin", o.cors_origin, "Access-Control-Allow-Origin value")
        ->envname("GEOMINE_CORS_ORIGIN")
        ->capture_default_str();

    auto* validate_cmd = app.add_subcommand("validate", "Report malformed rows and per-trace anomalies");
    add_input(validate_cmd, o);
    add_output(validate_cmd, o, {"text", "json"});

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? 0 : 1;
    }

    if (o.format.empty()) {
        if (discover_cmd->parsed() || frames_cmd->parsed()) o.format = "geojson";
        else if (validate_cmd->parsed()) o.format = "text";
        else o.format = "csv";
    }

    try {
        if (discover_cmd->parsed()) {
            auto l = load(o);
            const auto query = MapQuery::from_params(params_of(o));
            const auto result = run_map(l.log, gaz(l), query, o.strict);
            std::string text;
            if (o.format == "geojson") text = with_newline(dump_stable(map_document(result, query)));
            else if (o.format == "dot") text = to_dot(result.map);
            else if (o.format == "csv") text = edges_to_csv(result.map);
            else text = with_newline(dump_stable(result.map.to_json()));
            emit(o, text, out);
        } else if (variants_cmd->parsed()) {
            auto l = load(o);
            const auto rows = run_variants(l.log, gaz(l), MapQuery::from_params(params_of(o)), o.strict);
            emit(o, o.format == "csv" ? assessments_to_csv(rows) : with_newline(dump_stable(variants_document(rows))),
                 out);
        } else if (frames_cmd->parsed()) {
            auto l = load(o);
            const auto frames = run_frames(l.log, gaz(l), MapQuery::from_params(params_of(o)), o.bin_s, o.strict);
            emit(o, with_newline(dump_stable(frames_document(frames))), out);
        } else if (export_cmd->parsed()) {
            auto l = load(o);
            const auto query = MapQuery::from_params(params_of(o));
            const auto selected = select_traces(l.log, gaz(l), query, o.strict);
            std::ostringstream buf;
            write_csv(selected, buf);
            emit(o, buf.str(), out);
        } else if (generate_cmd->parsed()) {
            NetworkConfig config = o.config_path.empty() ? benchmark_network() : load_network_config(o.config_path);
            if (o.seed) config.seed = *o.seed;
            if (o.cases) config.cases = *o.cases;
            if (o.events) config = scale_config_to_target(config, *o.events);
            if (o.config_path.empty() && !o.cases && !o.events) config.cases = 1000;
            std::ostringstream buf;
            write_csv(generate(config), buf);
            emit(o, buf.str(), out);
        } else if (serve_cmd->parsed()) {
            ServerConfig sc;
            sc.host = o.host;
            sc.port = o.port;
            if (!o.gazetteer_path.empty()) sc.gazetteer = o.gazetteer_path;
            if (!o.layers_dir.empty()) sc.layers_dir = o.layers_dir;
            sc.strict = o.strict;
            sc.cors_origin = o.cors_origin;
            Service service(sc);
            HttpServer http(service);
            const int port = http.bind(sc.host, sc.port);
            if (port < 0) throw ConfigError("cannot bind " + sc.host + ":" + std::to_string(sc.port));
            err << "listening on http://" << sc.host << ":" << port << "\n";
            http.listen_after_bind();
        } else if (validate_cmd->parsed()) {
            o.strict = false;
            const bool strict = validate_cmd->count("--strict") > 0;
            auto l = load(o);
            l.report.append(validate(l.log));
            if (o.format == "json") {
                nlohmann::ordered_json doc = l.report.to_json();
                doc["case_count"] = l.log.case_count();
                doc["event_count"] = l.log.event_count();
                doc["skipped_rows"] = l.skipped;
                emit(o, with_newline(dump_stable(doc)), out);
            } else {
                emit(o, l.report.to_text(), out);
            }
            if (strict && !l.report.empty()) return 2;
        }
    } catch (const UnresolvableLevel& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const DataError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

} // namespace geomine
