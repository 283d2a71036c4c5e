#ifndef EVENTQA_ERRORS_HPP
#define EVENTQA_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace eventqa {

// Core error taxonomy; the C API maps these onto eqa_status codes.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct InvalidArgument : Error {
  explicit InvalidArgument(const std::string& msg) : Error(msg) {}
};

struct ParseError : Error {
  explicit ParseError(const std::string& msg) : Error(msg) {}
};

struct IoError : Error {
  explicit IoError(const std::string& msg) : Error(msg) {}
};

struct StateError : Error {
  explicit StateError(const std::string& msg) : Error(msg) {}
};

// Raised when training hits a non-finite loss; carries the offending step.
struct DivergedError : Error {
  explicit DivergedError(const std::string& msg, long long step_) : Error(msg), step(step_) {}
  long long step;
};

}  // namespace eventqa

#endif  // EVENTQA_ERRORS_HPP
