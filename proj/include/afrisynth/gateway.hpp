#pragma once

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "afrisynth/clock.hpp"

namespace afrisynth {

struct ChatRequest {
    std::string system_prompt;
    std::string user_prompt;
    std::string model_id;
    double temperature = 0.7;
    int max_output_tokens = 2048;
    std::string request_id;
};

enum class FinishReason { Complete, Length, Refusal, Error };

std::string_view to_string(FinishReason reason) noexcept;

struct ChatResponse {
    std::string request_id;
    std::string raw_text;
    FinishReason finish_reason = FinishReason::Complete;
    int attempts = 0;
    /// Waits applied before attempts 2..n, in order.
    std::vector<std::chrono::milliseconds> backoffs;
    /// Populated only when finish_reason == Error (batch mode).
    std::string error;
};

struct RetryPolicy {
    int max_retries = 3;
    std::chrono::milliseconds base_backoff{500};
    double backoff_multiplier = 2.0;
    std::set<int> retryable_statuses{408, 409, 429, 500, 502, 503, 504};

    /// Wait before retry number `retry_index` (0-based): base * multiplier^index.
    [[nodiscard]] std::chrono::milliseconds backoff_for(int retry_index) const;
    void validate() const;
};

/// One HTTP exchange as seen by the gateway. `status == 0` means the
/// transport failed before a status line arrived; it is treated as retryable.
struct WireReply {
    int status = 0;
    std::string body;
    std::string transport_error;
};

/// Transport behind the gateway. Implementations must be thread-safe.
class Backend {
public:
    virtual ~Backend() = default;
    virtual WireReply send(const ChatRequest& request, const std::string& wire_body) = 0;
};

/// Request body in the chat-completions shape:
/// {model, messages:[{role, content}], temperature, max_tokens}.
nlohmann::ordered_json build_wire_request(const ChatRequest& request);

/// Reads choices[0].message.content and choices[0].finish_reason. Throws
/// MalformedResponse when the body does not follow that shape.
std::pair<std::string, FinishReason> parse_wire_response(const std::string& body);

struct GatewayConfig {
    std::string endpoint_url = "https://api.openai.com";
    std::string endpoint_path = "/v1/chat/completions";
    std::string api_key_env_var = "OPENAI_API_KEY";
    std::string auth_header = "Authorization";
    std::string auth_scheme = "Bearer";
    std::string model_id = "gpt-4o-2024-08-06";
    double requests_per_second = 0;  // <= 0: unlimited
    std::size_t max_concurrency = 8;
    double temperature = 0.7;
    int max_output_tokens = 2048;
    int timeout_ms = 120000;
    RetryPolicy retry;

    static GatewayConfig from_json(const nlohmann::json& j);
};

/// Thread-safe chat-completion client: token-bucket rate limiting, then a
/// gateway-wide concurrency cap, then bounded exponential-backoff retries.
class Gateway {
public:
    Gateway(GatewayConfig config, std::shared_ptr<Backend> backend,
            std::shared_ptr<Clock> clock = std::make_shared<SteadyClock>());

    /// Request pre-filled with the configured model/temperature/token limit.
    [[nodiscard]] ChatRequest make_request(std::string system_prompt, std::string user_prompt,
                                           std::string request_id) const;

    ChatResponse complete(const ChatRequest& request) { return complete(request, config_.retry); }
    ChatResponse complete(const ChatRequest& request, const RetryPolicy& policy);

    /// Output order matches input order. Per-item failures become responses
    /// with finish_reason == Error; the batch itself never throws for them.
    std::vector<ChatResponse> complete_batch(std::span<const ChatRequest> requests,
                                             std::size_t concurrency_limit);
    std::vector<ChatResponse> complete_batch(std::span<const ChatRequest> requests) {
        return complete_batch(requests, config_.max_concurrency);
    }

    [[nodiscard]] const GatewayConfig& config() const noexcept { return config_; }
    [[nodiscard]] std::size_t max_in_flight_observed() const;

private:
    class Slot;

    // Fills attempts/backoffs as it goes so a throwing call still reports progress.
    void complete_into(const ChatRequest& request, const RetryPolicy& policy, ChatResponse& response);

    GatewayConfig config_;
    std::shared_ptr<Backend> backend_;
    std::shared_ptr<Clock> clock_;
    TokenBucket bucket_;

    mutable std::mutex slot_mu_;
    std::condition_variable slot_cv_;
    std::size_t in_flight_ = 0;
    std::size_t max_in_flight_ = 0;
};

/// First balanced JSON value in `raw`, ignoring surrounding prose and code
/// fences. NoJsonFound if no '{' or '[' starts a value; UnbalancedJson if one
/// opens but never closes.
nlohmann::json extract_json(std::string_view raw);

}  // namespace afrisynth
