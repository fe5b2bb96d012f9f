#include "geomine/server.hpp"

#include <httplib.h>

#include <algorithm>
#include <sstream>

#include "geomine/error.hpp"
#include "geomine/pipeline.hpp"
#include "geomine/stable_json.hpp"

namespace geomine {

using ojson = nlohmann::ordered_json;

namespace {

ApiResponse json_response(int status, const ojson& doc) { return {status, dump_stable(doc), "application/json"}; }

ApiResponse error_response(int status, const std::string& message, const ojson& extra = nullptr) {
    ojson doc = {{"error", message}};
    if (!extra.is_null()) doc["validation"] = extra;
    return json_response(status, doc);
}

std::int64_t parse_bin(const std::map<std::string, std::string>& params) {
    auto it = params.find("bin_s");
    if (it == params.end()) throw ConfigError("bin_s is required");
    try {
        std::size_t used = 0;
        auto v = std::stoll(it->second, &used);
        if (used != it->second.size()) throw ConfigError("bin_s must be an integer");
        if (v <= 0) throw ConfigError("bin_s must be positive");
        return v;
    } catch (const std::logic_error&) {
        throw ConfigError("bin_s must be an integer");
    }
}

/// Maps library errors to HTTP statuses around a handler body.
template <typename Fn>
ApiResponse guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const UnresolvableLevel& e) {
        return error_response(422, e.what());
    } catch (const SchemaError& e) {
        return error_response(400, e.what());
    } catch (const ConfigError& e) {
        return error_response(400, e.what());
    } catch (const DataError& e) {
        return error_response(422, e.what());
    } catch (const Error& e) {
        return error_response(400, e.what());
    }
}

} // namespace

Service::Service(ServerConfig config)
    : config_(std::move(config)), registry_(std::make_shared<const Registry>()) {
    if (config_.gazetteer) gazetteer_ = load_gazetteer(*config_.gazetteer);
    if (config_.layers_dir) {
        std::vector<std::filesystem::path> files;
        for (const auto& entry : std::filesystem::directory_iterator(*config_.layers_dir)) {
            const auto ext = entry.path().extension();
            if (entry.is_regular_file() && (ext == ".geojson" || ext == ".json")) files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
        for (const auto& f : files) {
            auto name = f.stem().string();
            layers_.emplace(name, load_evidence_layer(f, name));
        }
    }
}

std::shared_ptr<const Service::Registry> Service::snapshot() const {
    std::lock_guard lock(mutex_);
    return registry_;
}

std::shared_ptr<const Service::LoadedLog> Service::find(const std::string& id) const {
    auto reg = snapshot();
    auto it = reg->find(id);
    return it == reg->end() ? nullptr : it->second;
}

std::size_t Service::log_count() const { return snapshot()->size(); }

ApiResponse Service::post_log(const std::string& csv, const std::optional<std::string>& schema_json) {
    return guarded([&]() -> ApiResponse {
        if (csv.empty()) return error_response(400, "empty CSV body");
        SchemaMapping schema;
        if (schema_json && !schema_json->empty()) {
            try {
                schema = SchemaMapping::from_json(nlohmann::json::parse(*schema_json));
            } catch (const nlohmann::json::exception& e) {
                return error_response(400, std::string("schema document: ") + e.what());
            }
        }
        std::istringstream in(csv);
        auto parsed = parse_csv(in, schema, ParseOptions{false}, "upload.csv");
        auto loaded = std::make_shared<LoadedLog>();
        loaded->report = std::move(parsed.report);
        if (config_.strict && !loaded->report.empty())
            return error_response(422, "malformed rows in strict mode", loaded->report.to_json());

        EventLog log = std::move(parsed.log);
        if (!gazetteer_.empty()) {
            auto geo = geocode(log, gazetteer_, false);
            if (config_.strict && !geo.report.empty())
                return error_response(422, "unresolved cities in strict mode", geo.report.to_json());
            loaded->report.append(geo.report);
            log = std::move(geo.log);
        }
        loaded->report.append(validate(log));
        loaded->log = std::move(log);

        const std::string id = "log-" + std::to_string(next_id_.fetch_add(1));
        {
            std::lock_guard lock(mutex_);
            auto next = std::make_shared<Registry>(*registry_);
            next->emplace(id, loaded);
            registry_ = std::move(next);
        }
        ojson doc;
        doc["log_id"] = id;
        doc["case_count"] = loaded->log.case_count();
        doc["event_count"] = loaded->log.event_count();
        doc["skipped_rows"] = parsed.skipped_rows;
        doc["validation"] = loaded->report.summary();
        return json_response(201, doc);
    });
}

ApiResponse Service::get_map(const std::string& log_id, const std::map<std::string, std::string>& params) const {
    auto loaded = find(log_id);
    if (!loaded) return error_response(404, "unknown log '" + log_id + "'");
    return guarded([&] {
        const auto query = MapQuery::from_params(params);
        const auto result = run_map(loaded->log, gazetteer_ptr(), query, config_.strict);
        return json_response(200, map_document(result, query));
    });
}

ApiResponse Service::get_variants(const std::string& log_id, const std::map<std::string, std::string>& params) const {
    auto loaded = find(log_id);
    if (!loaded) return error_response(404, "unknown log '" + log_id + "'");
    return guarded([&] {
        const auto query = MapQuery::from_params(params);
        return json_response(200, variants_document(run_variants(loaded->log, gazetteer_ptr(), query, config_.strict)));
    });
}

ApiResponse Service::get_frames(const std::string& log_id, const std::map<std::string, std::string>& params) const {
    auto loaded = find(log_id);
    if (!loaded) return error_response(404, "unknown log '" + log_id + "'");
    return guarded([&] {
        const auto query = MapQuery::from_params(params);
        const auto bin = parse_bin(params);
        return json_response(200, frames_document(run_frames(loaded->log, gazetteer_ptr(), query, bin, config_.strict)));
    });
}

ApiResponse Service::list_layers() const {
    auto list = ojson::array();
    for (const auto& [name, layer] : layers_) {
        list.push_back({{"name", name}, {"kind", to_string(layer.kind)}, {"feature_count", layer.features.size()}});
    }
    return json_response(200, ojson{{"layers", std::move(list)}});
}

ApiResponse Service::get_layer(const std::string& name) const {
    auto it = layers_.find(name);
    if (it == layers_.end()) return error_response(404, "unknown layer '" + name + "'");
    return {200, it->second.to_string(), "application/geo+json"};
}

struct HttpServer::Impl {
    Service& service;
    httplib::Server server;

    explicit Impl(Service& s) : service(s) {}

    static std::map<std::string, std::string> params_of(const httplib::Request& req) {
        std::map<std::string, std::string> out;
        for (const auto& [k, v] : req.params) out[k] = v;
        return out;
    }

    static void send(httplib::Response& res, const ApiResponse& r) {
        res.status = r.status;
        res.set_content(r.body, r.content_type);
    }
};

HttpServer::HttpServer(Service& service) : impl_(std::make_unique<Impl>(service)) {
    auto& srv = impl_->server;
    Service& svc = service;
    srv.set_default_headers({{"Access-Control-Allow-Origin", svc.config().cors_origin},
                             {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                             {"Access-Control-Allow-Headers", "Content-Type"}});
    srv.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    srv.Post("/logs", [&svc](const httplib::Request& req, httplib::Response& res) {
        std::string csv;
        std::optional<std::string> schema;
        if (req.is_multipart_form_data()) {
            if (req.has_file("file")) csv = req.get_file_value("file").content;
            if (req.has_file("schema")) schema = req.get_file_value("schema").content;
        } else {
            csv = req.body;
            if (req.has_param("schema")) schema = req.get_param_value("schema");
        }
        Impl::send(res, svc.post_log(csv, schema));
    });
    srv.Get(R"(/logs/([^/]+)/map)", [&svc](const httplib::Request& req, httplib::Response& res) {
        Impl::send(res, svc.get_map(req.matches[1], Impl::params_of(req)));
    });
    srv.Get(R"(/logs/([^/]+)/variants)", [&svc](const httplib::Request& req, httplib::Response& res) {
        Impl::send(res, svc.get_variants(req.matches[1], Impl::params_of(req)));
    });
    srv.Get(R"(/logs/([^/]+)/frames)", [&svc](const httplib::Request& req, httplib::Response& res) {
        Impl::send(res, svc.get_frames(req.matches[1], Impl::params_of(req)));
    });
    srv.Get("/layers", [&svc](const httplib::Request&, httplib::Response& res) { Impl::send(res, svc.list_layers()); });
    srv.Get(R"(/layers/([^/]+))", [&svc](const httplib::Request& req, httplib::Response& res) {
        Impl::send(res, svc.get_layer(req.matches[1]));
    });
    srv.set_error_handler([](const httplib::Request&, httplib::Response& res) {
        if (res.body.empty()) res.set_content(dump_stable(ojson{{"error", "not found"}}), "application/json");
    });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
    if (port == 0) return impl_->server.bind_to_any_port(host);
    return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool HttpServer::listen_after_bind() { return impl_->server.listen_after_bind(); }

void HttpServer::stop() {
    if (impl_) impl_->server.stop();
}

void HttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

} // namespace geomine
