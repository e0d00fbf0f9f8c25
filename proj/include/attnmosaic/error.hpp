#pragma once

#include <stdexcept>
#include <string>

namespace attnmosaic {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad argument, malformed file content, violated precondition.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Unsupported or corrupt file encoding. Treated as a validation failure by the CLI.
class FormatError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// File could not be opened, read or written.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace attnmosaic
