#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "http.hpp"

#include <stdexcept>

#include <httplib.h>

namespace schemamatch::detail {

std::string http_post_json(const std::string& url, const std::string& body, const Headers& headers,
                           int timeout_seconds) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw std::runtime_error("endpoint '" + url + "' has no scheme");
    const auto path_start = url.find('/', scheme_end + 3);
    const std::string base = path_start == std::string::npos ? url : url.substr(0, path_start);
    const std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

    httplib::Client client(base);
    client.set_connection_timeout(timeout_seconds, 0);
    client.set_read_timeout(timeout_seconds, 0);
    client.set_write_timeout(timeout_seconds, 0);
    httplib::Headers h;
    for (const auto& [k, v] : headers) h.emplace(k, v);

    auto res = client.Post(path, h, body, "application/json");
    if (!res) throw std::runtime_error("request to " + url + " failed: " + httplib::to_string(res.error()));
    if (res->status < 200 || res->status >= 300)
        throw std::runtime_error("request to " + url + " returned HTTP " + std::to_string(res->status));
    return res->body;
}

}  // namespace schemamatch::detail
