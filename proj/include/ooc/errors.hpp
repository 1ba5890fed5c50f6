#pragma once

#include <stdexcept>
#include <string>

namespace ooc {

// Base class for every error raised by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input violates a documented precondition or invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

// Malformed file syntax. Carries the byte offset when known.
class ParseError : public Error {
public:
    explicit ParseError(const std::string& what, std::size_t byte = 0)
        : Error(what), byte_(byte) {}
    std::size_t byte() const { return byte_; }

private:
    std::size_t byte_;
};

// A persisted artifact does not match the expected version or vocabulary.
class CompatibilityError : public Error {
public:
    using Error::Error;
};

// A one-shot model cannot be fit from the given reference.
class FitError : public Error {
public:
    using Error::Error;
};

// Filesystem read/write failure.
class IoError : public Error {
public:
    using Error::Error;
};

// A vendor response does not have the shape the mapping describes.
// `path` is the field path that could not be resolved, e.g. "Labels[0].Name".
class MappingError : public Error {
public:
    MappingError(const std::string& what, std::string path)
        : Error(what), path_(std::move(path)) {}
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

// Transport or HTTP-level failure talking to a detection endpoint.
class RemoteError : public Error {
public:
    RemoteError(const std::string& what, bool retryable, int status = 0)
        : Error(what), retryable_(retryable), status_(status) {}
    bool retryable() const { return retryable_; }
    int status() const { return status_; }  // 0 when no HTTP status was received

private:
    bool retryable_;
    int status_;
};

// Non-finite value produced during numeric computation.
class NumericError : public Error {
public:
    explicit NumericError(const std::string& what, long long iteration = -1)
        : Error(what), iteration_(iteration) {}
    long long iteration() const { return iteration_; }

private:
    long long iteration_;
};

}  // namespace ooc
