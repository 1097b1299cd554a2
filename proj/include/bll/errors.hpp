#pragma once

#include <stdexcept>
#include <string>

namespace bll {

// Error categories. The CLI maps each kind to a distinct exit status.
enum class ErrorKind {
    Domain,
    Stability,
    Shape,
    Parameter,
    Compatibility,
    DegenerateClosure,
    InsufficientData,
    Divergence,
    Cfl,
    Alignment,
    Configuration,
    Io,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what);
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

// Thrown by step_nsf when a prescribed dt exceeds the stability bound.
class CflError : public Error {
public:
    CflError(const std::string& what, double suggested_dt)
        : Error(ErrorKind::Cfl, what), suggested_dt_(suggested_dt) {}
    double suggested_dt() const noexcept { return suggested_dt_; }

private:
    double suggested_dt_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

} // namespace bll
