#pragma once

#include <stdexcept>
#include <string>

namespace bdtr {

/// Coarse error classes; the CLI maps each to its own exit status.
enum class ErrorCategory {
    invalid_argument,
    numerical,
    validation,
    alignment,
    configuration,
    parse,
    io,
};

inline const char* to_string(ErrorCategory c) noexcept {
    switch (c) {
        case ErrorCategory::invalid_argument: return "invalid-argument";
        case ErrorCategory::numerical: return "numerical";
        case ErrorCategory::validation: return "validation";
        case ErrorCategory::alignment: return "alignment";
        case ErrorCategory::configuration: return "configuration";
        case ErrorCategory::parse: return "parse";
        case ErrorCategory::io: return "io";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& what)
        : std::runtime_error(what), category_(category) {}

    ErrorCategory category() const noexcept { return category_; }

private:
    ErrorCategory category_;
};

struct InvalidArgument : Error {
    explicit InvalidArgument(const std::string& w) : Error(ErrorCategory::invalid_argument, w) {}
};
struct NumericalError : Error {
    explicit NumericalError(const std::string& w) : Error(ErrorCategory::numerical, w) {}
};
struct ValidationError : Error {
    explicit ValidationError(const std::string& w) : Error(ErrorCategory::validation, w) {}
};
struct AlignmentError : Error {
    explicit AlignmentError(const std::string& w) : Error(ErrorCategory::alignment, w) {}
};
struct ConfigError : Error {
    explicit ConfigError(const std::string& w) : Error(ErrorCategory::configuration, w) {}
};
struct ParseError : Error {
    explicit ParseError(const std::string& w) : Error(ErrorCategory::parse, w) {}
};
struct IoError : Error {
    explicit IoError(const std::string& w) : Error(ErrorCategory::io, w) {}
};

}  // namespace bdtr
