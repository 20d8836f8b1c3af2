#pragma once

#include <stdexcept>
#include <string>

namespace gcalc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user configuration (bad spec file, unknown manifold or function id).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// File could not be read, parsed or written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace gcalc
