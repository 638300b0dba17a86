#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace memplan {

/// Stable error codes. The string forms are part of the CLI and HTTP contracts.
enum class ErrorCode {
    domain_error,
    range_error,
    model_not_found,
    key_not_found,
    parse_error,
    conflict,
    capacity_exceeded,
    infeasible,
    invalid_request,
    io_error,
};

inline std::string_view code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::domain_error: return "DOMAIN_ERROR";
        case ErrorCode::range_error: return "RANGE_ERROR";
        case ErrorCode::model_not_found: return "MODEL_NOT_FOUND";
        case ErrorCode::key_not_found: return "KEY_NOT_FOUND";
        case ErrorCode::parse_error: return "PARSE_ERROR";
        case ErrorCode::conflict: return "CONFLICT";
        case ErrorCode::capacity_exceeded: return "CAPACITY_EXCEEDED";
        case ErrorCode::infeasible: return "INFEASIBLE";
        case ErrorCode::invalid_request: return "INVALID_REQUEST";
        case ErrorCode::io_error: return "IO_ERROR";
    }
    return "UNKNOWN";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

struct DomainError : Error {
    explicit DomainError(const std::string& m) : Error(ErrorCode::domain_error, m) {}
};

struct RangeError : Error {
    explicit RangeError(const std::string& m) : Error(ErrorCode::range_error, m) {}
};

struct ModelNotFound : Error {
    explicit ModelNotFound(const std::string& name)
        : Error(ErrorCode::model_not_found, "unknown model '" + name + "'") {}
};

struct KeyNotFound : Error {
    explicit KeyNotFound(const std::string& m) : Error(ErrorCode::key_not_found, m) {}
};

struct ConflictError : Error {
    explicit ConflictError(const std::string& m) : Error(ErrorCode::conflict, m) {}
};

struct CapacityError : Error {
    explicit CapacityError(const std::string& m) : Error(ErrorCode::capacity_exceeded, m) {}
};

struct InvalidRequest : Error {
    explicit InvalidRequest(const std::string& m) : Error(ErrorCode::invalid_request, m) {}
};

struct IoError : Error {
    explicit IoError(const std::string& m) : Error(ErrorCode::io_error, m) {}
};

/// Schema violation. `line` is 1-based; 0 means the whole document.
class ParseError : public Error {
public:
    ParseError(std::size_t line, std::string field, const std::string& detail)
        : Error(ErrorCode::parse_error, format(line, field, detail)),
          line_(line), field_(std::move(field)) {}

    std::size_t line() const noexcept { return line_; }
    const std::string& field() const noexcept { return field_; }

private:
    static std::string format(std::size_t line, const std::string& field, const std::string& detail) {
        std::string out;
        if (line > 0) out += "line " + std::to_string(line) + ": ";
        if (!field.empty()) out += "field '" + field + "': ";
        return out + detail;
    }

    std::size_t line_;
    std::string field_;
};

/// No configuration fits the budget. Carries the cheapest known cost when one exists.
class InfeasibleError : public Error {
public:
    InfeasibleError(const std::string& m, std::optional<double> cheapest_cost,
                    std::string cheapest_key = {})
        : Error(ErrorCode::infeasible, m),
          cheapest_cost_(cheapest_cost), cheapest_key_(std::move(cheapest_key)) {}

    std::optional<double> cheapest_cost() const noexcept { return cheapest_cost_; }
    const std::string& cheapest_key() const noexcept { return cheapest_key_; }

private:
    std::optional<double> cheapest_cost_;
    std::string cheapest_key_;
};

}  // namespace memplan
