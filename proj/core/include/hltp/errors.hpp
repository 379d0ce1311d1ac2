#pragma once

#include <stdexcept>
#include <string>

namespace hltp {

// Base class for every error raised by the library. exit_code() is the
// process status the command-line front end maps the error to.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
  virtual int exit_code() const { return 5; }
};

// Malformed input file or command-line value.
class ParseError : public Error {
 public:
  using Error::Error;
  int exit_code() const override { return 2; }
};

// An operation was called outside its domain, e.g. a non-invertible
// harmonic operator or a sample of R(t) that is numerically singular.
class PreconditionError : public Error {
 public:
  using Error::Error;
  int exit_code() const override { return 3; }
};

// An iterative or adaptive procedure did not reach its target.
class ConvergenceError : public Error {
 public:
  using Error::Error;
  int exit_code() const override { return 4; }
};

// Internal consistency check failed.
class InternalError : public Error {
 public:
  using Error::Error;
  int exit_code() const override { return 5; }
};

}  // namespace hltp
