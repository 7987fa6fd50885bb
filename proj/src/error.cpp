#include "llmmc/error.hpp"

namespace llmmc {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::syntax: return "syntax";
        case ErrorKind::duplicate_identifier: return "duplicate_identifier";
        case ErrorKind::unknown_identifier: return "unknown_identifier";
        case ErrorKind::bound_violation: return "bound_violation";
        case ErrorKind::missing_override: return "missing_override";
        case ErrorKind::type_mismatch: return "type_mismatch";
        case ErrorKind::evaluation: return "evaluation";
        case ErrorKind::nondeterminism: return "nondeterminism";
        case ErrorKind::invalid_model: return "invalid_model";
        case ErrorKind::unknown_label: return "unknown_label";
        case ErrorKind::non_convergence: return "non_convergence";
        case ErrorKind::faulty_action: return "faulty_action";
        case ErrorKind::oracle: return "oracle";
        case ErrorKind::io: return "io";
        case ErrorKind::timeout: return "timeout";
        case ErrorKind::state_limit: return "state_limit";
        case ErrorKind::usage: return "usage";
    }
    return "unknown";
}

namespace {

std::string format_message(const std::string& message, SourceLocation where) {
    if (where.line == 0) {
        return message;
    }
    return std::to_string(where.line) + ":" + std::to_string(where.column) + ": " + message;
}

}  // namespace

Error::Error(ErrorKind kind, const std::string& message, SourceLocation where)
    : std::runtime_error(format_message(message, where)), kind_(kind), where_(where), detail_(message) {}

}  // namespace llmmc
