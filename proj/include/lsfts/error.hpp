#pragma once

#include <stdexcept>
#include <string>

namespace lsfts {

/// Broad failure classes. The CLI maps them onto exit codes.
enum class ErrorKind {
    Parameter,  // invalid tuning value or argument
    Parse,      // malformed input text
    Data,       // well-formed input with unusable content
    Grid,       // header / grid mismatch
    Numerical,  // singular system, degenerate bootstrap, ...
    Io,
};

inline const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Parameter: return "parameter error";
        case ErrorKind::Parse: return "parse error";
        case ErrorKind::Data: return "data error";
        case ErrorKind::Grid: return "grid error";
        case ErrorKind::Numerical: return "numerical error";
        case ErrorKind::Io: return "I/O error";
    }
    return "error";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class ParameterError : public Error {
public:
    explicit ParameterError(const std::string& what) : Error(ErrorKind::Parameter, what) {}
};

class ParseError : public Error {
public:
    explicit ParseError(const std::string& what) : Error(ErrorKind::Parse, what) {}
};

class DataError : public Error {
public:
    explicit DataError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

class GridError : public Error {
public:
    explicit GridError(const std::string& what) : Error(ErrorKind::Grid, what) {}
};

class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};

}  // namespace lsfts
