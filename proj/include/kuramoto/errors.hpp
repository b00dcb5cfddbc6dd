#pragma once

#include <stdexcept>
#include <string>

namespace kuramoto {

/// Raised when a run produces non-finite values, violates the step-size
/// bound, or would alias spectral mass above the recording Nyquist frequency.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// Two spectra that must share a frequency grid do not.
class GridMismatch : public std::invalid_argument {
 public:
  explicit GridMismatch(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace kuramoto
