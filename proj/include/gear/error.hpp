#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gear {

enum class ErrorCategory {
    Dimension,
    EmptyAggregation,
    Contract,
    Parse,
    Io,
    Config,
    Validation,
};

std::string_view category_name(ErrorCategory c);

// Base of every error the library throws. The category is stable and
// machine-readable; the CLI maps it onto exit codes.
class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& message)
        : std::runtime_error(message), category_(category) {}

    ErrorCategory category() const noexcept { return category_; }

private:
    ErrorCategory category_;
};

class DimensionError : public Error {
public:
    explicit DimensionError(const std::string& m) : Error(ErrorCategory::Dimension, m) {}
};

class EmptyAggregationError : public Error {
public:
    explicit EmptyAggregationError(const std::string& m)
        : Error(ErrorCategory::EmptyAggregation, m) {}
};

class ContractError : public Error {
public:
    explicit ContractError(const std::string& m) : Error(ErrorCategory::Contract, m) {}
};

class ParseError : public Error {
public:
    ParseError(const std::string& source, std::size_t line, const std::string& m)
        : Error(ErrorCategory::Parse, source + ":" + std::to_string(line) + ": " + m),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class IoError : public Error {
public:
    explicit IoError(const std::string& m) : Error(ErrorCategory::Io, m) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& m) : Error(ErrorCategory::Config, m) {}
};

class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& m) : Error(ErrorCategory::Validation, m) {}
};

} // namespace gear
