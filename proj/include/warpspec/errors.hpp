#pragma once

#include <stdexcept>
#include <string>

namespace warpspec {

/// Radius or parameter outside the domain where a model is defined.
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// Malformed or inconsistent run configuration.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// A refinement loop hit its cap before the requested condition held.
class RefinementCapError : public std::runtime_error {
 public:
  explicit RefinementCapError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace warpspec
