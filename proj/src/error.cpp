#include "afrisynth/error.hpp"

namespace afrisynth {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::Io: return "IoError";
        case ErrorKind::Schema: return "SchemaError";
        case ErrorKind::Config: return "ConfigError";
        case ErrorKind::MissingUpstream: return "MissingUpstream";
        case ErrorKind::ExhaustedRetries: return "ExhaustedRetries";
        case ErrorKind::Auth: return "AuthError";
        case ErrorKind::MalformedResponse: return "MalformedResponse";
        case ErrorKind::Http: return "HttpError";
        case ErrorKind::NoJsonFound: return "NoJsonFound";
        case ErrorKind::UnbalancedJson: return "UnbalancedJson";
        case ErrorKind::EmptyText: return "EmptyText";
        case ErrorKind::EmptySet: return "EmptySet";
        case ErrorKind::IncompatibleSignatures: return "IncompatibleSignatures";
        case ErrorKind::LanguageMismatch: return "LanguageMismatch";
        case ErrorKind::ParseFailure: return "ParseFailure";
        case ErrorKind::AnswerExtraction: return "AnswerExtractionFailure";
        case ErrorKind::NoNumberFound: return "NoNumberFound";
        case ErrorKind::NumberPreservation: return "NumberPreservationFailure";
        case ErrorKind::InsufficientPairs: return "InsufficientPairs";
        case ErrorKind::InsufficientRecords: return "InsufficientRecords";
        case ErrorKind::VerdictParse: return "VerdictParseFailure";
        case ErrorKind::GoldNotNumeric: return "GoldNotNumeric";
        case ErrorKind::EmptyRun: return "EmptyRun";
    }
    return "Error";
}

}  // namespace afrisynth
