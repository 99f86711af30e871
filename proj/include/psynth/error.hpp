#pragma once

#include <stdexcept>
#include <string>

namespace psynth {

/// Base for every error raised by the library. Each module throws its own subtype
/// so callers (and the CLI exit path) can tell configuration problems from data problems.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SchemaError : public Error {
public:
    using Error::Error;
};

class IngestError : public Error {
public:
    using Error::Error;
};

class PersonaError : public Error {
public:
    using Error::Error;
};

class CalibrationError : public Error {
public:
    using Error::Error;
};

/// Calibration targets that no reweighting of the seed can reach.
class InfeasibleError : public CalibrationError {
public:
    using CalibrationError::CalibrationError;
};

class BackendError : public Error {
public:
    BackendError(const std::string& what, std::string raw = {})
        : Error(what), raw_(std::move(raw)) {}

    /// Raw model output that caused the failure, kept for inspection.
    const std::string& raw() const noexcept { return raw_; }

private:
    std::string raw_;
};

class ParseError : public BackendError {
public:
    using BackendError::BackendError;
};

class TemplateError : public Error {
public:
    using Error::Error;
};

class TransportError : public Error {
public:
    explicit TransportError(const std::string& what, int status = 0)
        : Error(what), status_(status) {}

    /// HTTP status, or 0 when the failure happened below HTTP.
    int status() const noexcept { return status_; }

private:
    int status_;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class EvaluationError : public Error {
public:
    using Error::Error;
};

} // namespace psynth
