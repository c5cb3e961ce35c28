#include "epitrack/api.hpp"

#include "httplib.h"

#include <sys/socket.h>

namespace epitrack::api {

Server::Server(const Store& store, ServerOptions options)
    : service_(store), options_(std::move(options)), http_(std::make_unique<httplib::Server>()) {
    const std::size_t threads = options_.threads ? options_.threads : 1;
    http_->new_task_queue = [threads] { return new httplib::ThreadPool(threads); };
    http_->set_tcp_nodelay(true);
    http_->set_default_headers({{"Access-Control-Allow-Origin", "*"}});
    // SO_REUSEADDR only: the library default adds SO_REUSEPORT, which lets a second server share a busy port.
    http_->set_socket_options([](int sock) {
        int yes = 1;
        ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
    });

    if (options_.asset_dir && std::filesystem::is_directory(*options_.asset_dir))
        http_->set_mount_point("/", options_.asset_dir->string());

    const auto serve = [this](const httplib::Request& req, httplib::Response& res) {
        Params params;
        for (const auto& [key, value] : req.params) params.try_emplace(key, value);
        const Response out = service_.handle(req.path, params);
        res.status = out.status;
        res.set_content(out.body, out.content_type);
    };
    http_->Get("/healthz", serve);
    http_->Get(R"(/api/v1/.*)", serve);
    http_->Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
        res.set_header("Access-Control-Allow-Methods", "GET, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type");
        res.status = 204;
    });
    http_->set_error_handler([](const httplib::Request& req, httplib::Response& res) {
        if (!res.body.empty()) return;
        const int status = res.status == 404 ? 404 : res.status >= 500 ? 500 : 400;
        res.set_content(error_document(status, "no route for " + req.method + " " + req.path).dump(),
                        "application/json");
    });
}

Server::~Server() {
    stop();
}

bool Server::bind() {
    if (options_.port == 0) bound_port_ = http_->bind_to_any_port(options_.host);
    else bound_port_ = http_->bind_to_port(options_.host, options_.port) ? options_.port : -1;
    return bound_port_ > 0;
}

bool Server::listen() {
    return http_->listen_after_bind();
}

void Server::stop() {
    if (http_) http_->stop();
}

bool Server::is_running() const {
    return http_->is_running();
}

httplib::Server& Server::raw() {
    return *http_;
}

} // namespace epitrack::api
