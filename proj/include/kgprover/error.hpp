#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace kgp {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input stream. `offset` is the byte offset where parsing stopped.
class ParseError : public Error {
public:
    ParseError(const std::string& message, std::size_t offset)
        : Error(message + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// A file on disk violates its schema. `line` is 1-based; 0 when unknown.
class FormatError : public Error {
public:
    FormatError(const std::string& where, std::size_t line, const std::string& message)
        : Error(where + (line ? ":" + std::to_string(line) : std::string()) + ": " + message),
          line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class NotFoundError : public Error {
public:
    using Error::Error;
};

class SealedError : public Error {
public:
    SealedError() : Error("graph store is sealed; mutation rejected") {}
};

class DimensionError : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

/// Network or backend failure. Retry wrappers only retry when `retryable()`.
class TransportError : public Error {
public:
    TransportError(const std::string& message, bool retryable)
        : Error(message), retryable_(retryable) {}
    bool retryable() const noexcept { return retryable_; }

private:
    bool retryable_;
};

class ExtractionError : public Error {
public:
    ExtractionError(const std::string& message, std::string raw)
        : Error(message), raw_(std::move(raw)) {}
    const std::string& raw() const noexcept { return raw_; }

private:
    std::string raw_;
};

class ScoreParseError : public Error {
public:
    using Error::Error;
};

/// A scripted mock ran out of entries; always a test-setup problem.
class ScriptExhaustedError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

/// Dataset load failure listing every offending record.
class DatasetError : public Error {
public:
    explicit DatasetError(std::vector<std::string> problems)
        : Error(join(problems)), problems_(std::move(problems)) {}
    const std::vector<std::string>& problems() const noexcept { return problems_; }

private:
    static std::string join(const std::vector<std::string>& items) {
        std::string out = "dataset rejected:";
        for (const auto& item : items) out += "\n  " + item;
        return out;
    }
    std::vector<std::string> problems_;
};

}  // namespace kgp
