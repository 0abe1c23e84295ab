#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace schemamatch {

// Root of every error raised by the library. `kind()` is the stable,
// machine-readable name surfaced by the CLI.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual const char* kind() const noexcept { return "Error"; }
};

class ParseError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "ParseError"; }
};

// Carries every violation found, not just the first.
class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<std::string> violations);
    const std::vector<std::string>& violations() const noexcept { return violations_; }
    const char* kind() const noexcept override { return "ValidationError"; }

private:
    std::vector<std::string> violations_;
};

class ConfigError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "ConfigError"; }
};

class ResolutionError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "ResolutionError"; }
};

class BudgetTooSmall : public Error {
public:
    BudgetTooSmall(std::string item, std::size_t required, std::size_t available);
    const std::string& item() const noexcept { return item_; }
    std::size_t required() const noexcept { return required_; }
    std::size_t available() const noexcept { return available_; }
    const char* kind() const noexcept override { return "BudgetTooSmall"; }

private:
    std::string item_;
    std::size_t required_;
    std::size_t available_;
};

class ClientError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "ClientError"; }
};

class ProviderError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "ProviderError"; }
};

class DimMismatch : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "DimMismatch"; }
};

}  // namespace schemamatch
