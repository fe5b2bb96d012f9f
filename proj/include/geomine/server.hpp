#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "geomine/eventlog.hpp"
#include "geomine/export.hpp"
#include "geomine/geo.hpp"

namespace geomine {

struct ServerConfig {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::optional<std::filesystem::path> gazetteer;
    std::optional<std::filesystem::path> layers_dir;
    bool strict = false;
    std::string cors_origin = "*";
};

struct ApiResponse {
    int status = 200;
    std::string body;
    std::string content_type = "application/json";
};

/// Transport-independent API. Logs live in an immutable registry snapshot
/// that is replaced as a whole on every upload, so readers see either the
/// old or the new set of logs, never a partial one.
class Service {
public:
    /// Loads the gazetteer and scans layers_dir for *.geojson / *.json
    /// (layer name = file stem). Throws on invalid startup data.
    explicit Service(ServerConfig config);

    ApiResponse post_log(const std::string& csv, const std::optional<std::string>& schema_json);
    ApiResponse get_map(const std::string& log_id, const std::map<std::string, std::string>& params) const;
    ApiResponse get_variants(const std::string& log_id, const std::map<std::string, std::string>& params) const;
    ApiResponse get_frames(const std::string& log_id, const std::map<std::string, std::string>& params) const;
    ApiResponse list_layers() const;
    ApiResponse get_layer(const std::string& name) const;

    const ServerConfig& config() const noexcept { return config_; }
    const Gazetteer& gazetteer() const noexcept { return gazetteer_; }
    std::size_t log_count() const;

private:
    struct LoadedLog {
        EventLog log;
        ValidationReport report;
    };
    using Registry = std::map<std::string, std::shared_ptr<const LoadedLog>>;

    std::shared_ptr<const Registry> snapshot() const;
    std::shared_ptr<const LoadedLog> find(const std::string& id) const;
    const Gazetteer* gazetteer_ptr() const noexcept { return gazetteer_.empty() ? nullptr : &gazetteer_; }

    ServerConfig config_;
    Gazetteer gazetteer_;
    std::map<std::string, LayerDoc> layers_;
    mutable std::mutex mutex_;
    std::shared_ptr<const Registry> registry_;
    std::atomic<std::uint64_t> next_id_{1};
};

/// cpp-httplib front end for a Service.
class HttpServer {
public:
    explicit HttpServer(Service& service);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Binds host:port (port 0 picks a free one) and returns the bound port, or -1.
    int bind(const std::string& host, int port);
    /// Blocks until stop().
    bool listen_after_bind();
    void stop();
    void wait_until_ready() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace geomine
