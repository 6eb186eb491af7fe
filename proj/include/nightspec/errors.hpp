#pragma once

#include <stdexcept>
#include <string>

namespace nightspec {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// A scalar argument is outside its documented domain (negative gain,
// threshold <= 0, x outside [0,1], ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Array/image dimensions do not match the operation's contract.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// A file does not conform to its format. `byte_offset` points at the
// offending location when it is known, -1 otherwise.
class FormatError : public Error {
 public:
  explicit FormatError(const std::string& what, long long byte_offset = -1)
      : Error(byte_offset >= 0 ? what + " (byte offset " + std::to_string(byte_offset) + ")"
                               : what),
        byte_offset_(byte_offset) {}

  long long byte_offset() const { return byte_offset_; }

 private:
  long long byte_offset_;
};

// A linear system is singular where a unique solution was required.
class RankError : public Error {
 public:
  using Error::Error;
};

// Non-finite values appeared mid-computation (optimizer abort path).
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace nightspec
