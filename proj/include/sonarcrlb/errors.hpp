#pragma once

#include <stdexcept>
#include <string>

namespace sonarcrlb {

/// Invalid user-supplied configuration (waveform, sweep, scenario fields).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Target coincides with a sensor node origin; ranges and bearings are undefined.
class GeometryError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Argument outside the domain of a closed-form model (log of a non-positive value, |a| >= 1).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A covariance or information matrix is too badly conditioned to factorize reliably.
class ConditioningError : public std::runtime_error {
 public:
  ConditioningError(const std::string& what, double condition_estimate)
      : std::runtime_error(what), condition_estimate_(condition_estimate) {}

  double condition_estimate() const noexcept { return condition_estimate_; }

 private:
  double condition_estimate_;
};

}  // namespace sonarcrlb
