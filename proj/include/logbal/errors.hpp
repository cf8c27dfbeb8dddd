#pragma once

#include <stdexcept>
#include <string>

namespace logbal {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// No torso lean in (-pi/2, pi/2) puts the COM above the contact point.
class NoEquilibrium : public Error {
 public:
  using Error::Error;
};

/// No torso lean realises the requested initial COM offset.
class NoPosture : public Error {
 public:
  using Error::Error;
};

class SingularMass : public Error {
 public:
  using Error::Error;
};

class NonFinite : public Error {
 public:
  using Error::Error;
};

/// The foot lever arm (r*theta - l0) vanished.
class DegenerateLever : public Error {
 public:
  using Error::Error;
};

class NotStabilizable : public Error {
 public:
  using Error::Error;
};

class NoConvergence : public Error {
 public:
  using Error::Error;
};

class SingularInnovation : public Error {
 public:
  using Error::Error;
};

/// Scenario/IO failure; the message carries file, line and key when known.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace logbal
