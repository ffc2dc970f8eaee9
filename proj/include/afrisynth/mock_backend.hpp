#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "afrisynth/gateway.hpp"

namespace afrisynth {

/// One scripted reply. `content` and `raw_body` are templates:
///   ${user} ${system} ${request_id}  whole prompt fields
///   ${1} ${2} ...                    capture groups of the rule's user_regex
///   ${json:NAME}                     same value, escaped for a JSON string
/// `raw_body` replaces the whole HTTP body (used to script malformed replies).
struct MockReply {
    int status = 200;
    std::optional<std::string> content;
    std::string finish_reason = "stop";
    std::optional<std::string> raw_body;

    static MockReply ok(std::string content) { return MockReply{200, std::move(content), "stop", std::nullopt}; }
    static MockReply fail(int status) { return MockReply{status, std::nullopt, "stop", std::nullopt}; }
};

/// A rule matches when every populated predicate holds. Replies are consumed
/// in order, per request_id (default) or globally across requests; once
/// exhausted the last reply repeats.
struct MockRule {
    std::string name;
    std::optional<std::string> system_contains;
    std::optional<std::string> user_contains;
    std::optional<std::string> user_regex;
    std::optional<std::string> request_id_prefix;
    bool per_request = true;
    std::vector<MockReply> replies;
};

struct MockCall {
    std::string request_id;
    std::string rule;  // empty when the default handler answered
    int status = 0;
    std::size_t in_flight_at_start = 0;
};

/// Deterministic offline backend. Without rules it echoes the user prompt.
class MockBackend final : public Backend {
public:
    using Responder = std::function<MockReply(const ChatRequest&)>;

    MockBackend();

    static std::shared_ptr<MockBackend> from_fixture(const nlohmann::json& fixture);
    static std::shared_ptr<MockBackend> load_fixture(const std::filesystem::path& path);

    void add_rule(MockRule rule);
    void set_default(Responder responder);
    /// Real wall-clock delay per call, so concurrent calls overlap.
    void set_latency(std::chrono::milliseconds latency);

    WireReply send(const ChatRequest& request, const std::string& wire_body) override;

    [[nodiscard]] std::vector<MockCall> transcript() const;
    [[nodiscard]] std::size_t calls_for(const std::string& request_id) const;
    [[nodiscard]] std::size_t max_in_flight() const;

private:
    struct CompiledRule {
        MockRule rule;
        std::optional<std::regex> pattern;
        std::size_t global_cursor = 0;
        std::map<std::string, std::size_t> per_request_cursor;
    };

    mutable std::mutex mu_;
    std::vector<CompiledRule> rules_;
    Responder default_;
    std::chrono::milliseconds latency_{0};
    std::vector<MockCall> transcript_;
    std::map<std::string, std::size_t> calls_per_request_;
    std::size_t in_flight_ = 0;
    std::size_t max_in_flight_ = 0;
};

/// Renders a MockReply template against a request and regex captures.
std::string render_mock_template(const std::string& tmpl, const ChatRequest& request,
                                 const std::vector<std::string>& captures);

}  // namespace afrisynth
