#pragma once

#include <stdexcept>
#include <string>

namespace denoise {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unreadable or malformed image files, unsupported pixel formats.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Image dimensions incompatible with the requested operation.
class SizeError : public Error {
 public:
  using Error::Error;
};

// A pixel received no contribution during patch aggregation.
class CoverageError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace denoise
