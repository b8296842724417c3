#ifndef AELOC_ERRORS_HPP
#define AELOC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace aeloc {

// Bad parameters, missing inputs, geometry that cannot be realized.
// The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed or inconsistent data fed to an operation.
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failure (divergence, factorization breakdown). Exit code 3.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace aeloc

#endif  // AELOC_ERRORS_HPP
