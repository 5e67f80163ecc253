#ifndef CISIM_ERRORS_HPP
#define CISIM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace cisim {

// Model coefficients were requested outside the model's domain
// (e.g. a CIR coordinate at or below zero). Callers abort the
// current replicate and account for it; never swallow silently.
struct DomainError : std::runtime_error {
  explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

struct DimensionError : std::invalid_argument {
  explicit DimensionError(const std::string& what)
      : std::invalid_argument(what) {}
};

struct SingularCovariance : std::runtime_error {
  explicit SingularCovariance(const std::string& what)
      : std::runtime_error(what) {}
};

struct DegenerateBridge : std::runtime_error {
  explicit DegenerateBridge(const std::string& what)
      : std::runtime_error(what) {}
};

struct AllZeroWeights : std::runtime_error {
  explicit AllZeroWeights(const std::string& what)
      : std::runtime_error(what) {}
};

struct ZeroBarDensity : std::runtime_error {
  explicit ZeroBarDensity(const std::string& what)
      : std::runtime_error(what) {}
};

struct UnsupportedFunctional : std::invalid_argument {
  explicit UnsupportedFunctional(const std::string& what)
      : std::invalid_argument(what) {}
};

struct ConfigError : std::invalid_argument {
  explicit ConfigError(const std::string& what)
      : std::invalid_argument(what) {}
};

struct EmptyInput : std::invalid_argument {
  explicit EmptyInput(const std::string& what)
      : std::invalid_argument(what) {}
};

}  // namespace cisim

#endif  // CISIM_ERRORS_HPP
