#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "afrisynth/http_backend.hpp"

#include <cstdlib>

#include <httplib.h>

#include "afrisynth/error.hpp"

namespace afrisynth {

struct HttpBackend::Impl {
    std::string endpoint_url;
    std::string path;
    httplib::Headers headers;
    int timeout_ms = 0;
};

HttpBackend::HttpBackend(const GatewayConfig& config) : impl_(std::make_unique<Impl>()) {
    const char* key = std::getenv(config.api_key_env_var.c_str());
    if (key == nullptr || *key == '\0') {
        throw Error(ErrorKind::Config, "environment variable " + config.api_key_env_var + " is not set");
    }
    impl_->endpoint_url = config.endpoint_url;
    impl_->path = config.endpoint_path;
    impl_->timeout_ms = config.timeout_ms;
    const std::string value = config.auth_scheme.empty() ? std::string(key) : config.auth_scheme + " " + key;
    impl_->headers.emplace(config.auth_header, value);
}

HttpBackend::~HttpBackend() = default;

WireReply HttpBackend::send(const ChatRequest& /*request*/, const std::string& wire_body) {
    // httplib::Client is not safe to share across threads; one per call.
    httplib::Client client(impl_->endpoint_url);
    const auto timeout = std::chrono::milliseconds(impl_->timeout_ms);
    client.set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout));
    client.set_read_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout));
    client.set_write_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout));

    WireReply reply;
    auto res = client.Post(impl_->path, impl_->headers, wire_body, "application/json");
    if (!res) {
        reply.status = 0;
        reply.transport_error = httplib::to_string(res.error());
        return reply;
    }
    reply.status = res->status;
    reply.body = res->body;
    return reply;
}

}  // namespace afrisynth
