#pragma once

#include <string>

#include <httplib.h>

#include "cbench/eval.hpp"

namespace cbench {

// Transport backed by cpp-httplib. TLS endpoints work when the build has
// OpenSSL support compiled in.
class HttplibTransport : public Transport {
  public:
    HttpResponse post(const HttpRequest& request) override {
        auto [base, path] = split_url(request.url);
        httplib::Client client(base);
        client.set_connection_timeout(30, 0);
        client.set_read_timeout(120, 0);
        httplib::Headers headers;
        std::string content_type = "application/json";
        for (auto& [k, v] : request.headers) {
            if (k == "Content-Type")
                content_type = v;
            else
                headers.emplace(k, v);
        }
        auto result = client.Post(path, headers, request.body, content_type);
        HttpResponse response;
        if (!result) {
            response.transport_ok = false;
            response.error = httplib::to_string(result.error());
            return response;
        }
        response.transport_ok = true;
        response.status = result->status;
        response.body = result->body;
        return response;
    }

  private:
    static std::pair<std::string, std::string> split_url(const std::string& url) {
        auto scheme = url.find("://");
        size_t host_start = scheme == std::string::npos ? 0 : scheme + 3;
        auto slash = url.find('/', host_start);
        if (slash == std::string::npos) return {url, "/"};
        return {url.substr(0, slash), url.substr(slash)};
    }
};

} // namespace cbench
