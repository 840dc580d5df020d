#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace acr {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A record file (corpus, QA set, graph, index artifact) failed validation.
/// `line()` is 1-based, or 0 when the problem is not tied to a line.
class FormatError : public Error {
public:
    FormatError(const std::string& what, std::size_t line = 0)
        : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Chat or embedding service failure. `status()` is the HTTP status, or 0
/// for transport-level failures.
class ProviderError : public Error {
public:
    explicit ProviderError(const std::string& what, int status = 0) : Error(what), status_(status) {}

    int status() const noexcept { return status_; }

private:
    int status_;
};

/// Bad configuration value (maps to CLI usage errors).
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace acr
