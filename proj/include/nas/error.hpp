#pragma once

#include <stdexcept>
#include <string>

namespace nas {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller passed a value outside an operation's domain (dimension
/// mismatch, out-of-range index, empty sequence, ...).
class InputDomainError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration (training, generator or CLI options).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent input data (JSONL lines, schema mismatch).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Non-finite loss or gradient during training.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// A persisted file could not be decoded.
class CorruptFileError : public Error {
 public:
  using Error::Error;
};

/// A persisted file carries a format version this build does not read.
class VersionError : public Error {
 public:
  using Error::Error;
};

/// Internal consistency violation (e.g. a stale forward trace).
class InternalError : public Error {
 public:
  using Error::Error;
};

}  // namespace nas
