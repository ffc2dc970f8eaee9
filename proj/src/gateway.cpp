#include "afrisynth/gateway.hpp"

#include <atomic>
#include <cmath>
#include <thread>
#include <unordered_set>

#include "afrisynth/error.hpp"

namespace afrisynth {

std::string_view to_string(FinishReason reason) noexcept {
    switch (reason) {
        case FinishReason::Complete: return "complete";
        case FinishReason::Length: return "length";
        case FinishReason::Refusal: return "refusal";
        case FinishReason::Error: return "error";
    }
    return "error";
}

std::chrono::milliseconds RetryPolicy::backoff_for(int retry_index) const {
    const double ms = static_cast<double>(base_backoff.count()) * std::pow(backoff_multiplier, retry_index);
    return std::chrono::milliseconds(static_cast<std::int64_t>(std::llround(ms)));
}

void RetryPolicy::validate() const {
    if (max_retries < 0) throw Error(ErrorKind::Config, "max_retries must be >= 0");
    if (base_backoff.count() < 0) throw Error(ErrorKind::Config, "base_backoff must be >= 0");
    if (!(backoff_multiplier > 1.0)) throw Error(ErrorKind::Config, "backoff_multiplier must be > 1");
}

nlohmann::ordered_json build_wire_request(const ChatRequest& request) {
    nlohmann::ordered_json messages = nlohmann::ordered_json::array();
    if (!request.system_prompt.empty()) {
        messages.push_back({{"role", "system"}, {"content", request.system_prompt}});
    }
    messages.push_back({{"role", "user"}, {"content", request.user_prompt}});
    nlohmann::ordered_json body;
    body["model"] = request.model_id;
    body["messages"] = std::move(messages);
    body["temperature"] = request.temperature;
    body["max_tokens"] = request.max_output_tokens;
    return body;
}

std::pair<std::string, FinishReason> parse_wire_response(const std::string& body) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::MalformedResponse, std::string("body is not JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("choices") || !j["choices"].is_array() || j["choices"].empty()) {
        throw Error(ErrorKind::MalformedResponse, "missing choices[0]");
    }
    const auto& choice = j["choices"][0];
    if (!choice.is_object() || !choice.contains("message") || !choice["message"].is_object()) {
        throw Error(ErrorKind::MalformedResponse, "missing choices[0].message");
    }
    const auto& message = choice["message"];
    FinishReason reason = FinishReason::Complete;
    if (choice.contains("finish_reason") && choice["finish_reason"].is_string()) {
        const auto fr = choice["finish_reason"].get<std::string>();
        if (fr == "length") reason = FinishReason::Length;
        else if (fr == "content_filter" || fr == "refusal") reason = FinishReason::Refusal;
    }
    if (message.contains("refusal") && message["refusal"].is_string()) {
        return {message["refusal"].get<std::string>(), FinishReason::Refusal};
    }
    if (!message.contains("content") || !message["content"].is_string()) {
        throw Error(ErrorKind::MalformedResponse, "choices[0].message.content is not a string");
    }
    return {message["content"].get<std::string>(), reason};
}

GatewayConfig GatewayConfig::from_json(const nlohmann::json& j) {
    GatewayConfig c;
    if (!j.is_object()) throw Error(ErrorKind::Config, "gateway section must be an object");
    try {
        c.endpoint_url = j.value("endpoint_url", c.endpoint_url);
        c.endpoint_path = j.value("endpoint_path", c.endpoint_path);
        c.api_key_env_var = j.value("api_key_env_var", c.api_key_env_var);
        c.auth_header = j.value("auth_header", c.auth_header);
        c.auth_scheme = j.value("auth_scheme", c.auth_scheme);
        c.model_id = j.value("model_id", c.model_id);
        c.requests_per_second = j.value("requests_per_second", c.requests_per_second);
        c.max_concurrency = j.value("max_concurrency", c.max_concurrency);
        c.temperature = j.value("temperature", c.temperature);
        c.max_output_tokens = j.value("max_output_tokens", c.max_output_tokens);
        c.timeout_ms = j.value("timeout_ms", c.timeout_ms);
        c.retry.max_retries = j.value("max_retries", c.retry.max_retries);
        c.retry.base_backoff = std::chrono::milliseconds(j.value("base_backoff_ms", c.retry.base_backoff.count()));
        c.retry.backoff_multiplier = j.value("backoff_multiplier", c.retry.backoff_multiplier);
        if (j.contains("retryable_statuses")) {
            c.retry.retryable_statuses = j["retryable_statuses"].get<std::set<int>>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Config, std::string("gateway: ") + e.what());
    }
    if (j.contains("api_key")) {
        throw Error(ErrorKind::Config, "credentials are read from the environment; use api_key_env_var");
    }
    if (c.max_concurrency == 0) throw Error(ErrorKind::Config, "max_concurrency must be >= 1");
    if (c.temperature < 0 || c.temperature > 2) throw Error(ErrorKind::Config, "temperature must be in [0,2]");
    if (c.max_output_tokens <= 0) throw Error(ErrorKind::Config, "max_output_tokens must be positive");
    c.retry.validate();
    return c;
}

class Gateway::Slot {
public:
    explicit Slot(Gateway& g) : g_(g) {
        std::unique_lock lock(g_.slot_mu_);
        g_.slot_cv_.wait(lock, [&] { return g_.in_flight_ < g_.config_.max_concurrency; });
        ++g_.in_flight_;
        g_.max_in_flight_ = std::max(g_.max_in_flight_, g_.in_flight_);
    }
    ~Slot() {
        {
            std::lock_guard lock(g_.slot_mu_);
            --g_.in_flight_;
        }
        g_.slot_cv_.notify_one();
    }
    Slot(const Slot&) = delete;
    Slot& operator=(const Slot&) = delete;

private:
    Gateway& g_;
};

Gateway::Gateway(GatewayConfig config, std::shared_ptr<Backend> backend, std::shared_ptr<Clock> clock)
    : config_(std::move(config)), backend_(std::move(backend)), clock_(std::move(clock)),
      bucket_(config_.requests_per_second, std::max(1.0, config_.requests_per_second), *clock_) {
    if (!backend_) throw Error(ErrorKind::Config, "gateway requires a backend");
    if (config_.max_concurrency == 0) throw Error(ErrorKind::Config, "max_concurrency must be >= 1");
    config_.retry.validate();
}

ChatRequest Gateway::make_request(std::string system_prompt, std::string user_prompt,
                                  std::string request_id) const {
    ChatRequest r;
    r.system_prompt = std::move(system_prompt);
    r.user_prompt = std::move(user_prompt);
    r.model_id = config_.model_id;
    r.temperature = config_.temperature;
    r.max_output_tokens = config_.max_output_tokens;
    r.request_id = std::move(request_id);
    return r;
}

std::size_t Gateway::max_in_flight_observed() const {
    std::lock_guard lock(slot_mu_);
    return max_in_flight_;
}

ChatResponse Gateway::complete(const ChatRequest& request, const RetryPolicy& policy) {
    ChatResponse response;
    complete_into(request, policy, response);
    return response;
}

void Gateway::complete_into(const ChatRequest& request, const RetryPolicy& policy, ChatResponse& response) {
    policy.validate();
    if (request.user_prompt.empty()) throw std::invalid_argument("user_prompt must be non-empty");
    if (request.temperature < 0 || request.temperature > 2) {
        throw std::invalid_argument("temperature must be in [0,2]");
    }
    if (request.max_output_tokens <= 0) throw std::invalid_argument("max_output_tokens must be positive");

    const std::string wire_body = build_wire_request(request).dump();
    response.request_id = request.request_id;

    std::string last_failure;
    const int max_attempts = policy.max_retries + 1;
    for (int attempt = 1; attempt <= max_attempts; ++attempt) {
        if (attempt > 1) {
            const auto wait = policy.backoff_for(attempt - 2);
            response.backoffs.push_back(wait);
            clock_->sleep_for(wait);
        }
        response.attempts = attempt;

        bucket_.acquire();
        WireReply reply;
        {
            Slot slot(*this);
            reply = backend_->send(request, wire_body);
        }

        if (reply.status == 401 || reply.status == 403) {
            throw Error(ErrorKind::Auth, "credential rejected (HTTP " + std::to_string(reply.status) + ")");
        }
        if (reply.status >= 200 && reply.status < 300) {
            auto [text, reason] = parse_wire_response(reply.body);
            response.raw_text = std::move(text);
            response.finish_reason = reason;
            return;
        }
        const bool retryable = reply.status == 0 || policy.retryable_statuses.contains(reply.status);
        last_failure = reply.status == 0 ? "transport error: " + reply.transport_error
                                         : "HTTP " + std::to_string(reply.status);
        if (!retryable) {
            throw Error(ErrorKind::Http, request.request_id + ": " + last_failure);
        }
    }
    throw Error(ErrorKind::ExhaustedRetries, request.request_id + ": " + std::to_string(max_attempts) +
                                                 " attempts failed, last: " + last_failure);
}

std::vector<ChatResponse> Gateway::complete_batch(std::span<const ChatRequest> requests,
                                                  std::size_t concurrency_limit) {
    if (concurrency_limit == 0) throw std::invalid_argument("concurrency_limit must be >= 1");
    {
        std::unordered_set<std::string> seen;
        for (const auto& r : requests) {
            if (!seen.insert(r.request_id).second) {
                throw std::invalid_argument("duplicate request_id in batch: " + r.request_id);
            }
        }
    }
    std::vector<ChatResponse> out(requests.size());
    if (requests.empty()) return out;

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < requests.size(); i = next++) {
            const auto& req = requests[i];
            ChatResponse& slot = out[i];
            slot.request_id = req.request_id;
            try {
                complete_into(req, config_.retry, slot);
            } catch (const std::exception& e) {
                slot.raw_text.clear();
                slot.finish_reason = FinishReason::Error;
                slot.error = e.what();
                slot.attempts = std::max(slot.attempts, 1);
            }
        }
    };

    const std::size_t n_workers = std::min(concurrency_limit, requests.size());
    if (n_workers == 1) {
        worker();
        return out;
    }
    std::vector<std::jthread> workers;
    workers.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) workers.emplace_back(worker);
    workers.clear();
    return out;
}

}  // namespace afrisynth
