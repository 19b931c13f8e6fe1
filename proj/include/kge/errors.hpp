#pragma once

#include <stdexcept>
#include <string>

namespace kge {

// Base class for all toolkit errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file (message names the offending line where applicable).
class ParseError : public Error {
 public:
  using Error::Error;
};

// A domain invariant or operation precondition was violated.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

class DuplicateEntityError : public Error {
 public:
  using Error::Error;
};

// Name or description contains an active marker character.
class MarkerCollisionError : public Error {
 public:
  using Error::Error;
};

// Marked span could not be recovered from a translated sentence.
class AlignmentError : public Error {
 public:
  using Error::Error;
};

// Retryable failure while talking to an external source system.
class TransportError : public Error {
 public:
  using Error::Error;
};

// Embedding provider failure; the affected pair counts as non-supporting.
class MatcherError : public Error {
 public:
  using Error::Error;
};

// Bad run configuration or command usage.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace kge
