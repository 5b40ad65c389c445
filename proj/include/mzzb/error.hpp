#pragma once

#include <stdexcept>
#include <string>

namespace mzzb {

/// Invalid model construction: dimension mismatch, non-PD covariance,
/// malformed mixture weights.
class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Argument outside the domain of a mathematical function.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The requested path does not apply to the given model variant.
class UnsupportedVariant : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Configuration file does not match the expected schema.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(field.empty() ? what : field + ": " + what),
        field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace mzzb
