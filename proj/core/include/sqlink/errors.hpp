#pragma once

#include <stdexcept>
#include <string>

namespace sqlink {

enum class ErrorCode {
    FileNotFound,
    NotADatabase,
    EmptySchema,
    InvalidCatalog,
    QueryFailure,
    MalformedDescriptionFile,
    UnknownSchemaElement,
    ParseError,
    EmptyLink,
    LengthMismatch,
    EmptyGold,
    EmptyInput,
    TransportError,
    AuthError,
    ReplayMiss,
    NoSqlFound,
    NoStructureFound,
    SelectionUnparseable,
    EmptyTrainingSet,
    MalformedDataset,
    UnknownTemplate,
    BadConfig,
};

inline const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::FileNotFound: return "FileNotFound";
        case ErrorCode::NotADatabase: return "NotADatabase";
        case ErrorCode::EmptySchema: return "EmptySchema";
        case ErrorCode::InvalidCatalog: return "InvalidCatalog";
        case ErrorCode::QueryFailure: return "QueryFailure";
        case ErrorCode::MalformedDescriptionFile: return "MalformedDescriptionFile";
        case ErrorCode::UnknownSchemaElement: return "UnknownSchemaElement";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::EmptyLink: return "EmptyLink";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::EmptyGold: return "EmptyGold";
        case ErrorCode::EmptyInput: return "EmptyInput";
        case ErrorCode::TransportError: return "TransportError";
        case ErrorCode::AuthError: return "AuthError";
        case ErrorCode::ReplayMiss: return "ReplayMiss";
        case ErrorCode::NoSqlFound: return "NoSqlFound";
        case ErrorCode::NoStructureFound: return "NoStructureFound";
        case ErrorCode::SelectionUnparseable: return "SelectionUnparseable";
        case ErrorCode::EmptyTrainingSet: return "EmptyTrainingSet";
        case ErrorCode::MalformedDataset: return "MalformedDataset";
        case ErrorCode::UnknownTemplate: return "UnknownTemplate";
        case ErrorCode::BadConfig: return "BadConfig";
    }
    return "Error";
}

/// Library-wide exception. Callers that need to branch on the failure kind
/// switch on code(); the message carries the human-readable detail.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace sqlink
