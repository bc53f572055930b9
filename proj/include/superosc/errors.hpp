#pragma once

#include <stdexcept>
#include <string>

namespace superosc {

/// Parameter triple outside the supported range (N, alpha, dynamic range).
class ParameterRangeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Evaluation point outside the box.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Wavenumber that does not fit the box eigenbasis.
class RepresentationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Grid or time step too coarse for the content it has to carry.
class ResolutionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Free-line grid too short: the packet would wrap around.
class ExtentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace superosc
