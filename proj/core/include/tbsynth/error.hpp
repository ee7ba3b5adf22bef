#pragma once

#include <stdexcept>
#include <string>

namespace tbsynth {

/// Base class for every failure the library reports by exception.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input that is not syntactically valid JSON. `position` is the byte offset.
class JsonSyntaxError : public Error {
 public:
  JsonSyntaxError(std::size_t position, const std::string& what)
      : Error("JSON syntax error at byte " + std::to_string(position) + ": " + what),
        position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

}  // namespace tbsynth
