#pragma once

#include <stdexcept>
#include <string>

namespace reslab {

// Root of every error the library raises. Each subclass names one failure
// mode so callers (and the CLI exit-code mapping) can dispatch on type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument sits on (or within tolerance of) a pole of a Gamma factor.
class PoleError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

// Log-magnitude of a result exceeds what binary64 can hold.
class OverflowError : public Error {
 public:
  using Error::Error;
};

// Method preconditions violated (e.g. Euler path with Re s too small).
class OffDomain : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class RankDeficient : public Error {
 public:
  using Error::Error;
};

class PlaneOverflow : public Error {
 public:
  using Error::Error;
};

class AngleParse : public Error {
 public:
  using Error::Error;
};

// Enumeration would emit more items than the configured cap.
class ExplosionGuard : public Error {
 public:
  using Error::Error;
};

class PrecisionExhausted : public Error {
 public:
  using Error::Error;
};

class EmptyInput : public Error {
 public:
  using Error::Error;
};

class TruncationTooSmall : public Error {
 public:
  using Error::Error;
};

class ContourThroughZero : public Error {
 public:
  using Error::Error;
};

class GridTooCoarse : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent configuration document.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace reslab
