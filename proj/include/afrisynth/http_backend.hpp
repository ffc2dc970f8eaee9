#pragma once

#include <memory>
#include <string>

#include "afrisynth/gateway.hpp"

namespace afrisynth {

/// Chat-completions over HTTP(S). The credential is read once, at
/// construction, from the environment variable named in the config.
class HttpBackend final : public Backend {
public:
    explicit HttpBackend(const GatewayConfig& config);
    ~HttpBackend() override;

    WireReply send(const ChatRequest& request, const std::string& wire_body) override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace afrisynth
