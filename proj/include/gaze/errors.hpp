// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace gaze {

// Base class for everything this library throws on purpose.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad input data: unreadable files, malformed rows, violated preconditions
// on user-supplied values. Maps to CLI exit code 2.
class InputError : public Error {
public:
    using Error::Error;
};

// Invalid configuration (thresholds out of order, missing provider fields...).
class ConfigError : public InputError {
public:
    using InputError::InputError;
};

// Text-generation / embedding provider failures: transport errors, exhausted
// retries, unusable replies. Maps to CLI exit code 3.
class BackendError : public Error {
public:
    using Error::Error;
};

// Missing or rejected credentials. Raised before any network call when the
// configured environment variable is unset.
class AuthError : public BackendError {
public:
    using BackendError::BackendError;
};

// Evaluator reply could not be parsed into a score block. Retryable once.
class EvalFormatError : public BackendError {
public:
    using BackendError::BackendError;
};

// Evaluator reply parsed but carried a score outside [0, 5]. Not retried.
class EvalRangeError : public BackendError {
public:
    using BackendError::BackendError;
};

// A should-be-impossible state: validated invariants broken downstream.
// Maps to CLI exit code 4.
class InternalError : public Error {
public:
    using Error::Error;
};

} // namespace gaze
