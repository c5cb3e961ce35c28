#pragma once

#include "epitrack/metrics.hpp"
#include "epitrack/store.hpp"

#include "json.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

namespace httplib {
class Server;
}

namespace epitrack::api {

using nlohmann::json;

/// Query parameters, already percent-decoded. First occurrence wins.
using Params = std::map<std::string, std::string>;

struct Response {
    int status = 200;
    std::string content_type = "application/json";
    std::string body;
};

// Document builders. Each takes the pinned version a request reads from.
json region_json(const RegionId& id);
json summary_document(const DatasetVersion& v, std::optional<Date> date);
json map_document(const DatasetVersion& v, std::optional<Date> date);
json search_document(const DatasetVersion& v, std::string_view query);
json series_document(const DatasetVersion& v, const RegionId& region);
json point_json(const DerivedPoint& p);
json compare_document(const DatasetVersion& v, std::string_view regions, std::string_view metric,
                      std::optional<Date> from, std::optional<Date> to);
json hierarchy_document(const DatasetVersion& v, const RegionId& country);
json meta_document(const DatasetVersion& v);
json continents_document(const DatasetVersion& v);
json top_document(const DatasetVersion& v, std::string_view metric, std::optional<Date> date, std::size_t k);

/// {status, code, message} with code in not_found | invalid_argument | internal.
json error_document(int status, std::string_view message);

/// Routes GET requests for /healthz and /api/v1/*. Every request reads one
/// version pinned at entry.
class Service {
public:
    explicit Service(const Store& store) : store_(store) {}

    Response handle(std::string_view path, const Params& params) const;

private:
    Response route(const DatasetVersion& v, std::string_view path, const Params& params) const;

    const Store& store_;
};

struct ServerOptions {
    std::string host = "127.0.0.1";
    int port = 8080;
    /// Served at / when the directory exists.
    std::optional<std::filesystem::path> asset_dir;
    std::size_t threads = 8;
};

/// HTTP/1.1 front end for Service. stop() lets in-flight requests finish.
class Server {
public:
    Server(const Store& store, ServerOptions options);
    ~Server();
    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    /// Binds the listening socket; port 0 picks a free port. Returns false if the address is unavailable.
    bool bind();
    int port() const noexcept { return bound_port_; }
    /// Blocks serving requests until stop().
    bool listen();
    void stop();
    bool is_running() const;

    /// The underlying server, for registering extra routes.
    httplib::Server& raw();

private:
    Service service_;
    ServerOptions options_;
    std::unique_ptr<httplib::Server> http_;
    int bound_port_ = -1;
};

} // namespace epitrack::api
