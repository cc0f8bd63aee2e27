#pragma once

#include <stdexcept>
#include <string>

namespace qfc {

// Base for every error raised by the library. Callers that only need to
// report and exit can catch this one type.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Evaluation outside a model's validity window, or an argument outside the
// mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

class RootNotBracketedError : public Error {
public:
    using Error::Error;
};

class StepSizeError : public Error {
public:
    using Error::Error;
};

class NumericalFailure : public Error {
public:
    using Error::Error;
};

class PreconditionError : public Error {
public:
    using Error::Error;
};

class FitError : public Error {
public:
    FitError(const std::string& what, double residual)
        : Error(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

class ActuationError : public Error {
public:
    using Error::Error;
};

class CoverageError : public Error {
public:
    using Error::Error;
};

// Malformed measured data: nonpositive peaks, negative counts, ...
class DataError : public Error {
public:
    using Error::Error;
};

class NoSignalError : public Error {
public:
    using Error::Error;
};

class EstimationError : public Error {
public:
    using Error::Error;
};

// Scenario / CSV problems. `line` is 1-based, 0 when unknown.
class ConfigError : public Error {
public:
    ConfigError(const std::string& what, int line = 0)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}
    int line() const noexcept { return line_; }

private:
    int line_;
};

}  // namespace qfc
