#pragma once

#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>

namespace lfm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes or lengths do not agree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// An argument is outside its documented domain.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Malformed external input (CSV, config). Message carries the position.
class ParseError : public Error {
 public:
  using Error::Error;
};

namespace detail {

template <typename... Args>
std::string concat(Args&&... args) {
  std::ostringstream os;
  (os << ... << std::forward<Args>(args));
  return os.str();
}

}  // namespace detail
}  // namespace lfm
