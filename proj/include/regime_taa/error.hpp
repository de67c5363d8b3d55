// error.hpp
// Exception hierarchy shared by every module. Each error carries a kind that
// the CLI maps onto a process exit code (2 config, 3 data, 4 numerical).

#pragma once

#include <stdexcept>
#include <string>

namespace regime_taa {

enum class ErrorKind {
    config,
    io,
    parse,
    validation,
    domain,
    length,
    shape,
    degenerate,
    linalg,
};

inline const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::config: return "config";
        case ErrorKind::io: return "io";
        case ErrorKind::parse: return "parse";
        case ErrorKind::validation: return "validation";
        case ErrorKind::domain: return "domain";
        case ErrorKind::length: return "length";
        case ErrorKind::shape: return "shape";
        case ErrorKind::degenerate: return "degenerate";
        case ErrorKind::linalg: return "linalg";
    }
    return "unknown";
}

inline int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::config: return 2;
        case ErrorKind::io:
        case ErrorKind::parse:
        case ErrorKind::validation:
        case ErrorKind::shape: return 3;
        case ErrorKind::domain:
        case ErrorKind::length:
        case ErrorKind::degenerate:
        case ErrorKind::linalg: return 4;
    }
    return 1;
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

#define REGIME_TAA_DEFINE_ERROR(Name, Kind)                                   \
    class Name : public Error {                                               \
    public:                                                                   \
        explicit Name(const std::string& what) : Error(ErrorKind::Kind, what) {} \
    }

REGIME_TAA_DEFINE_ERROR(ConfigError, config);
REGIME_TAA_DEFINE_ERROR(IoError, io);
REGIME_TAA_DEFINE_ERROR(ParseError, parse);
REGIME_TAA_DEFINE_ERROR(ValidationError, validation);
REGIME_TAA_DEFINE_ERROR(DomainError, domain);
REGIME_TAA_DEFINE_ERROR(LengthError, length);
REGIME_TAA_DEFINE_ERROR(ShapeError, shape);
REGIME_TAA_DEFINE_ERROR(DegenerateError, degenerate);
REGIME_TAA_DEFINE_ERROR(LinAlgError, linalg);

#undef REGIME_TAA_DEFINE_ERROR

}  // namespace regime_taa
