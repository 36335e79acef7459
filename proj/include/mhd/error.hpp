#pragma once

#include <stdexcept>
#include <string>

namespace mhd {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed configuration, invalid truncation, bad CLI input.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A wavevector outside K_N or equal to zero.
class OutOfLatticeError : public Error {
 public:
  using Error::Error;
};

// Violated orthogonality / divergence constraint on an input.
class ConstraintError : public Error {
 public:
  using Error::Error;
};

}  // namespace mhd
