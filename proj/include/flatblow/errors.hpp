#pragma once

#include <stdexcept>
#include <string>

namespace flatblow {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A function was evaluated outside the set where it is defined
/// (nonpositive logarithm argument, negative radicand, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A point does not lie in the domain of a directional chart.
class NotInChart : public Error {
 public:
  using Error::Error;
};

/// A root-finding bracket does not contain a sign change (or a class change).
class BracketError : public Error {
 public:
  using Error::Error;
};

/// An iterative oracle failed to converge.
class OracleFailure : public Error {
 public:
  using Error::Error;
};

/// Invalid user input (unknown registry id, empty grid, bad config).
class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace flatblow
