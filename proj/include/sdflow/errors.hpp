#pragma once

#include <stdexcept>
#include <string>

namespace sdflow {

// Common base so the CLI can map failures to exit codes in one place.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Spectral / field preconditions
struct NonZeroMean : Error { using Error::Error; };       // inverse laplacian fed a field with mean
struct NonPositiveB : Error { using Error::Error; };      // elastic law evaluated at b <= 0

// Solver failures
struct NegativeDensity : Error { using Error::Error; };
struct DegenerateDensity : Error { using Error::Error; }; // velocity recovery under the vacuum floor
struct StepFailure : Error { using Error::Error; };       // dt halved past max_halvings
struct NaNDetected : Error { using Error::Error; };

// Diagnostics
struct WindowTooShort : Error { using Error::Error; };

// Configuration and I/O
struct ParseError : Error { using Error::Error; };
struct ValidationError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

}  // namespace sdflow
