#include "epitrack/catalog.hpp"
#include "epitrack/error.hpp"
#include "epitrack/ingest.hpp"

#include "httplib.h"

namespace epitrack {

namespace {

struct Url {
    std::string origin;
    std::string path;
};

Url split_url(std::string_view url) {
    const auto scheme_end = url.find("://");
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string_view::npos) return {std::string(url), "/"};
    return {std::string(url.substr(0, path_start)), std::string(url.substr(path_start))};
}

std::string fetch_http(const std::string& url, const FetchOptions& options) {
    using clock = std::chrono::steady_clock;
    const auto deadline = clock::now() + options.total_timeout;
    const Url parts = split_url(url);

    httplib::Client client(parts.origin);
    if (!client.is_valid()) throw FetchError(false, "unsupported URL " + url);
    client.set_connection_timeout(options.connect_timeout);
    client.set_read_timeout(options.total_timeout);
    client.set_write_timeout(options.total_timeout);
    client.set_follow_location(true);

    std::string body;
    bool timed_out = false;
    int status = 0;
    auto res = client.Get(
        parts.path,
        [&](const httplib::Response& r) {
            status = r.status;
            return r.status < 400;
        },
        [&](const char* data, std::size_t n) {
            if (clock::now() > deadline) {
                timed_out = true;
                return false;
            }
            body.append(data, n);
            return true;
        });
    if (!res) {
        const auto err = res.error();
        if (status >= 400) throw FetchError(false, "HTTP " + std::to_string(status) + " from " + url);
        if (err == httplib::Error::ExceedRedirectCount) throw FetchError(false, "too many redirects for " + url);
        if (timed_out) throw FetchError(true, "timed out fetching " + url);
        throw FetchError(true, "fetching " + url + " failed: " + httplib::to_string(err));
    }
    if (res->status >= 400) throw FetchError(false, "HTTP " + std::to_string(res->status) + " from " + url);
    if (res->status >= 300) throw FetchError(false, "unresolved redirect (HTTP " + std::to_string(res->status) + ") from " + url);
    return body;
}

} // namespace

std::string fetch_source(const SourceDescriptor& desc, const FetchOptions& options) {
    const std::string& loc = desc.location;
    if (loc.starts_with("http://") || loc.starts_with("https://")) return fetch_http(loc, options);
    std::string path = loc;
    if (path.starts_with("file://")) path.erase(0, 7);
    return read_file(path);
}

} // namespace epitrack
