#pragma once

#include <stdexcept>
#include <string>

namespace fracsob {

// Bad input: malformed fields, masks, configs. The CLI maps these to exit code 1.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

// A scalar parameter outside its admissible range.
class ParameterError : public ValidationError {
 public:
  explicit ParameterError(const std::string& what) : ValidationError(what) {}
};

// Request exceeds a dense-oracle size limit.
class SizeError : public ValidationError {
 public:
  explicit SizeError(const std::string& what) : ValidationError(what) {}
};

// Iterative method failed to reach its tolerance. The CLI maps these to exit code 2.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fracsob
