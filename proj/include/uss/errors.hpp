#pragma once

#include <stdexcept>
#include <string>

namespace uss {

/// A precondition on a named protocol parameter was violated. The CLI maps
/// this to exit code 2.
class ParameterError : public std::invalid_argument {
 public:
  ParameterError(std::string parameter, const std::string& what)
      : std::invalid_argument(parameter + ": " + what),
        parameter_(std::move(parameter)) {}

  const std::string& parameter() const { return parameter_; }

 private:
  std::string parameter_;
};

}  // namespace uss
