#pragma once

#include <stdexcept>
#include <string>

namespace cueaudit {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A file could not be read or a row did not parse.
class LoadError : public Error {
 public:
  using Error::Error;
};

/// Parsed data violates a domain invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Missing or inconsistent configuration (templates, profiles, run config).
class ConfigError : public Error {
 public:
  using Error::Error;
};

class SamplingError : public Error {
 public:
  using Error::Error;
};

}  // namespace cueaudit
