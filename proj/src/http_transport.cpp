// SPDX-License-Identifier: Apache-2.0
#include "gaze/backend.hpp"

#ifdef GAZE_HAVE_OPENSSL
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>

#include "gaze/errors.hpp"

namespace gaze {

namespace {

struct SplitUrl {
    std::string base; // scheme://host[:port]
    std::string path; // /path...
};

SplitUrl split_url(const std::string& url) {
    const std::size_t scheme = url.find("://");
    if (scheme == std::string::npos) {
        throw ConfigError("endpoint must be an absolute URL: " + url);
    }
    const std::size_t path = url.find('/', scheme + 3);
    if (path == std::string::npos) return {url, "/"};
    return {url.substr(0, path), url.substr(path)};
}

} // namespace

HttpTransport default_http_transport() {
    return [](const HttpRequest& req) -> HttpResponse {
        const SplitUrl url = split_url(req.url);
        httplib::Client client(url.base);
        client.set_connection_timeout(0, req.timeout_ms * 1000LL);
        client.set_read_timeout(0, req.timeout_ms * 1000LL);
        client.set_write_timeout(0, req.timeout_ms * 1000LL);

        httplib::Headers headers;
        std::string content_type = "application/json";
        for (const auto& [key, value] : req.headers) {
            if (key == "Content-Type") {
                content_type = value;
            } else {
                headers.emplace(key, value);
            }
        }

        const httplib::Result result =
            client.Post(url.path, headers, req.body, content_type);
        if (!result) {
            return {0, "", httplib::to_string(result.error())};
        }
        return {result->status, result->body, ""};
    };
}

} // namespace gaze
