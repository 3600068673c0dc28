#pragma once

#include <stdexcept>
#include <string>

namespace bregforest {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller passed something the operation cannot accept (sizes, k > n, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A coordinate lies outside the generator's domain (or a gradient outside
// the gradient's range).
class DomainError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

// Malformed dataset / query input files.
class FormatError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Index-file failures. Each has its own type so callers can tell them apart.
class BadMagic : public Error {
 public:
  using Error::Error;
};

class VersionMismatch : public Error {
 public:
  using Error::Error;
};

class TruncatedFile : public Error {
 public:
  using Error::Error;
};

// An address or section offset that does not resolve.
class CorruptionError : public Error {
 public:
  using Error::Error;
};

}  // namespace bregforest
