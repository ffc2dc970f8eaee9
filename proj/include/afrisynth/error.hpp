#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace afrisynth {

enum class ErrorKind {
    Io,
    Schema,
    Config,
    MissingUpstream,
    // gateway
    ExhaustedRetries,
    Auth,
    MalformedResponse,
    Http,
    NoJsonFound,
    UnbalancedJson,
    // dedup
    EmptyText,
    EmptySet,
    IncompatibleSignatures,
    // generation
    LanguageMismatch,
    ParseFailure,
    AnswerExtraction,
    NoNumberFound,
    NumberPreservation,
    InsufficientPairs,
    InsufficientRecords,
    // evaluation
    VerdictParse,
    GoldNotNumeric,
    EmptyRun,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries a kind so callers can route
/// on it (count-and-continue vs. abort) without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

    /// True for failures originating in the chat-completion layer.
    [[nodiscard]] bool is_gateway_error() const noexcept {
        return kind_ == ErrorKind::ExhaustedRetries || kind_ == ErrorKind::Auth ||
               kind_ == ErrorKind::MalformedResponse || kind_ == ErrorKind::Http;
    }

private:
    ErrorKind kind_;
};

}  // namespace afrisynth
