#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace llmmc {

enum class ErrorKind {
    syntax,
    duplicate_identifier,
    unknown_identifier,
    bound_violation,
    missing_override,
    type_mismatch,
    evaluation,
    nondeterminism,
    invalid_model,
    unknown_label,
    non_convergence,
    faulty_action,
    oracle,
    io,
    timeout,
    state_limit,
    usage,
};

std::string_view to_string(ErrorKind kind);

/// Position inside a source text, 1-based. line == 0 means "no location".
struct SourceLocation {
    std::size_t line = 0;
    std::size_t column = 0;
};

/// Every failure raised by the library. The kind decides how the CLI maps it
/// onto an exit code.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message, SourceLocation where = {});

    ErrorKind kind() const noexcept { return kind_; }
    SourceLocation where() const noexcept { return where_; }
    /// Message without the location prefix.
    const std::string& detail() const noexcept { return detail_; }

private:
    ErrorKind kind_;
    SourceLocation where_;
    std::string detail_;
};

}  // namespace llmmc
