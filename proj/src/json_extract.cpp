#include <optional>
#include <string>
#include <string_view>

#include "afrisynth/error.hpp"
#include "afrisynth/gateway.hpp"

namespace afrisynth {
namespace {

// End offset (exclusive) of the bracket-balanced span starting at `start`,
// honouring JSON string literals; nullopt if it never closes.
std::optional<std::size_t> balanced_end(std::string_view s, std::size_t start) {
    std::string stack;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = start; i < s.size(); ++i) {
        const char c = s[i];
        if (in_string) {
            if (escaped) escaped = false;
            else if (c == '\\') escaped = true;
            else if (c == '"') in_string = false;
            continue;
        }
        switch (c) {
            case '"': in_string = true; break;
            case '{': stack.push_back('}'); break;
            case '[': stack.push_back(']'); break;
            case '}':
            case ']':
                if (stack.empty() || stack.back() != c) return std::nullopt;
                stack.pop_back();
                if (stack.empty()) return i + 1;
                break;
            default: break;
        }
    }
    return std::nullopt;
}

struct ScanResult {
    std::optional<nlohmann::json> value;
    bool saw_unbalanced = false;
};

ScanResult scan(std::string_view s) {
    ScanResult result;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '{' && s[i] != '[') continue;
        const auto end = balanced_end(s, i);
        if (!end) {
            result.saw_unbalanced = true;
            continue;
        }
        auto parsed = nlohmann::json::parse(s.substr(i, *end - i), nullptr, /*allow_exceptions=*/false);
        if (!parsed.is_discarded()) {
            result.value = std::move(parsed);
            return result;
        }
    }
    return result;
}

// Contents of the first ``` fenced block, if any.
std::optional<std::string_view> first_fence(std::string_view s) {
    const auto open = s.find("```");
    if (open == std::string_view::npos) return std::nullopt;
    auto body_start = s.find('\n', open + 3);
    if (body_start == std::string_view::npos) return std::nullopt;
    ++body_start;
    const auto close = s.find("```", body_start);
    if (close == std::string_view::npos) return s.substr(body_start);
    return s.substr(body_start, close - body_start);
}

}  // namespace

nlohmann::json extract_json(std::string_view raw) {
    if (auto fence = first_fence(raw)) {
        auto inner = scan(*fence);
        if (inner.value) return std::move(*inner.value);
    }
    auto whole = scan(raw);
    if (whole.value) return std::move(*whole.value);
    if (whole.saw_unbalanced) throw Error(ErrorKind::UnbalancedJson, "JSON value opens but never closes");
    throw Error(ErrorKind::NoJsonFound, "no JSON object or array in model output");
}

}  // namespace afrisynth
