#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace exactlab {

/// Base class for every error raised by the library. `kind()` is a stable
/// machine-readable tag used by the CLI error records.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error(message), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

class DimensionMismatch : public Error {
public:
    explicit DimensionMismatch(const std::string& msg) : Error("dimension_mismatch", msg) {}
};

class InvalidArgument : public Error {
public:
    explicit InvalidArgument(const std::string& msg) : Error("invalid_argument", msg) {}
};

/// Enumeration (of a domain or of a group) would exceed its configured cap.
class CapExceeded : public Error {
public:
    explicit CapExceeded(const std::string& msg) : Error("cap_exceeded", msg) {}
};

class SingleClass : public Error {
public:
    explicit SingleClass(const std::string& msg) : Error("single_class", msg) {}
};

class NonSeparable : public Error {
public:
    explicit NonSeparable(const std::string& msg) : Error("non_separable", msg) {}
};

class ConvergenceFailure : public Error {
public:
    explicit ConvergenceFailure(const std::string& msg) : Error("convergence_failure", msg) {}
};

class CertificationFailure : public Error {
public:
    explicit CertificationFailure(const std::string& msg) : Error("certification_failure", msg) {}
};

class RetryExhausted : public Error {
public:
    explicit RetryExhausted(const std::string& msg) : Error("retry_exhausted", msg) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error("config_error", msg) {}
};

/// Text that does not follow the problem grammar. `position` is the index of
/// the offending token.
class ParseError : public Error {
public:
    ParseError(std::size_t position, const std::string& reason)
        : Error("parse_error", "token " + std::to_string(position) + ": " + reason),
          position_(position), reason_(reason) {}

    std::size_t position() const noexcept { return position_; }
    const std::string& reason() const noexcept { return reason_; }

private:
    std::size_t position_;
    std::string reason_;
};

class OutOfVocabulary : public Error {
public:
    explicit OutOfVocabulary(const std::string& word)
        : Error("out_of_vocabulary", "unknown word '" + word + "'"), word_(word) {}

    const std::string& word() const noexcept { return word_; }

private:
    std::string word_;
};

}  // namespace exactlab
