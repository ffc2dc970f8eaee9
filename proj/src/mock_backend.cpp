#include "afrisynth/mock_backend.hpp"

#include <algorithm>
#include <cctype>
#include <thread>

#include "afrisynth/error.hpp"
#include "afrisynth/util.hpp"

namespace afrisynth {
namespace {

std::string json_escape(const std::string& s) {
    const auto quoted = nlohmann::json(s).dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
    return quoted.substr(1, quoted.size() - 2);
}

MockReply reply_from_json(const nlohmann::json& j) {
    MockReply r;
    r.status = j.value("status", 200);
    if (j.contains("content")) r.content = j["content"].get<std::string>();
    if (j.contains("raw_body")) r.raw_body = j["raw_body"].get<std::string>();
    r.finish_reason = j.value("finish_reason", std::string("stop"));
    return r;
}

std::string wire_body_for(const MockReply& reply, const std::string& content, const ChatRequest& request) {
    nlohmann::ordered_json body;
    body["id"] = "mock-" + request.request_id;
    body["object"] = "chat.completion";
    body["model"] = request.model_id;
    body["choices"] = nlohmann::ordered_json::array(
        {{{"index", 0},
          {"message", {{"role", "assistant"}, {"content", content}}},
          {"finish_reason", reply.finish_reason}}});
    return body.dump();
}

}  // namespace

std::string render_mock_template(const std::string& tmpl, const ChatRequest& request,
                                 const std::vector<std::string>& captures) {
    std::string out;
    out.reserve(tmpl.size());
    std::size_t i = 0;
    while (i < tmpl.size()) {
        if (tmpl[i] == '$' && i + 1 < tmpl.size() && tmpl[i + 1] == '{') {
            const auto close = tmpl.find('}', i + 2);
            if (close != std::string::npos) {
                std::string name = tmpl.substr(i + 2, close - i - 2);
                bool escape = false;
                if (name.rfind("json:", 0) == 0) {
                    escape = true;
                    name = name.substr(5);
                }
                std::optional<std::string> value;
                if (name == "user") value = request.user_prompt;
                else if (name == "system") value = request.system_prompt;
                else if (name == "request_id") value = request.request_id;
                else if (!name.empty() && std::all_of(name.begin(), name.end(), ::isdigit)) {
                    const auto idx = static_cast<std::size_t>(std::stoul(name));
                    value = idx < captures.size() ? captures[idx] : std::string();
                }
                if (value) {
                    out += escape ? json_escape(*value) : *value;
                    i = close + 1;
                    continue;
                }
            }
        }
        out.push_back(tmpl[i++]);
    }
    return out;
}

MockBackend::MockBackend()
    : default_([](const ChatRequest& r) { return MockReply::ok(r.user_prompt); }) {}

std::shared_ptr<MockBackend> MockBackend::from_fixture(const nlohmann::json& fixture) {
    auto mock = std::make_shared<MockBackend>();
    try {
        if (fixture.contains("latency_ms")) {
            mock->set_latency(std::chrono::milliseconds(fixture["latency_ms"].get<int>()));
        }
        if (fixture.contains("default")) {
            const auto& d = fixture["default"];
            if (d.is_string() && d.get<std::string>() == "echo") {
                // keep echo
            } else if (d.is_object()) {
                const MockReply reply = reply_from_json(d);
                mock->set_default([reply](const ChatRequest&) { return reply; });
            } else {
                throw Error(ErrorKind::Config, "mock fixture: default must be \"echo\" or a reply object");
            }
        }
        for (const auto& jr : fixture.value("rules", nlohmann::json::array())) {
            MockRule rule;
            rule.name = jr.value("name", std::string());
            if (jr.contains("system_contains")) rule.system_contains = jr["system_contains"].get<std::string>();
            if (jr.contains("user_contains")) rule.user_contains = jr["user_contains"].get<std::string>();
            if (jr.contains("user_regex")) rule.user_regex = jr["user_regex"].get<std::string>();
            if (jr.contains("request_id_prefix")) rule.request_id_prefix = jr["request_id_prefix"].get<std::string>();
            rule.per_request = jr.value("scope", std::string("per_request")) != "global";
            for (const auto& rep : jr.at("replies")) rule.replies.push_back(reply_from_json(rep));
            if (rule.replies.empty()) throw Error(ErrorKind::Config, "mock rule '" + rule.name + "' has no replies");
            mock->add_rule(std::move(rule));
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Config, std::string("mock fixture: ") + e.what());
    } catch (const std::regex_error& e) {
        throw Error(ErrorKind::Config, std::string("mock fixture regex: ") + e.what());
    }
    return mock;
}

std::shared_ptr<MockBackend> MockBackend::load_fixture(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::Config, path.string() + ": " + e.what());
    }
    return from_fixture(j);
}

void MockBackend::add_rule(MockRule rule) {
    CompiledRule compiled;
    if (rule.user_regex) compiled.pattern.emplace(*rule.user_regex, std::regex::ECMAScript);
    compiled.rule = std::move(rule);
    std::lock_guard lock(mu_);
    rules_.push_back(std::move(compiled));
}

void MockBackend::set_default(Responder responder) {
    std::lock_guard lock(mu_);
    default_ = std::move(responder);
}

void MockBackend::set_latency(std::chrono::milliseconds latency) {
    std::lock_guard lock(mu_);
    latency_ = latency;
}

WireReply MockBackend::send(const ChatRequest& request, const std::string& wire_body) {
    MockCall call;
    call.request_id = request.request_id;
    MockReply reply;
    std::vector<std::string> captures;
    std::chrono::milliseconds latency{};
    {
        std::lock_guard lock(mu_);
        ++in_flight_;
        max_in_flight_ = std::max(max_in_flight_, in_flight_);
        call.in_flight_at_start = in_flight_;
        ++calls_per_request_[request.request_id];
        latency = latency_;

        bool matched = false;
        for (auto& cr : rules_) {
            const auto& r = cr.rule;
            if (r.system_contains && request.system_prompt.find(*r.system_contains) == std::string::npos) continue;
            if (r.user_contains && request.user_prompt.find(*r.user_contains) == std::string::npos) continue;
            if (r.request_id_prefix && request.request_id.rfind(*r.request_id_prefix, 0) != 0) continue;
            captures.clear();
            if (cr.pattern) {
                std::smatch m;
                if (!std::regex_search(request.user_prompt, m, *cr.pattern)) continue;
                for (const auto& sub : m) captures.push_back(sub.str());
            }
            std::size_t& cursor = r.per_request ? cr.per_request_cursor[request.request_id] : cr.global_cursor;
            reply = r.replies[std::min(cursor, r.replies.size() - 1)];
            ++cursor;
            call.rule = r.name.empty() ? "rule" : r.name;
            matched = true;
            break;
        }
        if (!matched) reply = default_(request);
    }

    if (latency.count() > 0) std::this_thread::sleep_for(latency);

    WireReply wire;
    wire.status = reply.status;
    // The wire body must carry the prompt we were asked to send.
    const auto sent = nlohmann::json::parse(wire_body, nullptr, false);
    if (sent.is_discarded() || !sent.contains("messages") || sent["messages"].empty() ||
        sent["messages"].back().value("content", std::string()) != request.user_prompt) {
        wire.status = 400;
        wire.body = R"({"error":"mock: wire body does not carry the user prompt"})";
    } else if (reply.raw_body) {
        wire.body = render_mock_template(*reply.raw_body, request, captures);
    } else if (reply.status >= 200 && reply.status < 300) {
        wire.body = wire_body_for(reply, render_mock_template(reply.content.value_or(""), request, captures), request);
    } else {
        wire.body = R"({"error":"scripted failure"})";
    }
    call.status = wire.status;

    std::lock_guard lock(mu_);
    --in_flight_;
    transcript_.push_back(std::move(call));
    return wire;
}

std::vector<MockCall> MockBackend::transcript() const {
    std::lock_guard lock(mu_);
    return transcript_;
}

std::size_t MockBackend::calls_for(const std::string& request_id) const {
    std::lock_guard lock(mu_);
    const auto it = calls_per_request_.find(request_id);
    return it == calls_per_request_.end() ? 0 : it->second;
}

std::size_t MockBackend::max_in_flight() const {
    std::lock_guard lock(mu_);
    return max_in_flight_;
}

}  // namespace afrisynth
