#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#ifndef TTINT_SCALAR
#define TTINT_SCALAR double
#endif

namespace ttint {

/// Working scalar of the library. Fixed at configuration time (CMake option
/// TTINT_SCALAR); only IEEE double is exercised by the test suite.
using Scalar = TTINT_SCALAR;
using Index = Eigen::Index;

using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

/// Tuple of mode indices. Entries are 0-based inside the library; text
/// output (CLI, logs) prints them 1-based.
using MultiIndex = std::vector<int>;

/// splitmix64 finalizer; used for cache keys and counter-based seeding.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Invalid argument or out-of-range index.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An intersection (cross) matrix is numerically singular.
class DegeneracyError : public std::runtime_error {
 public:
  DegeneracyError(int interface, const std::string& what)
      : std::runtime_error(what + " (interface " + std::to_string(interface + 1) + ")"),
        interface_(interface) {}

  /// 0-based interface between modes interface() and interface()+1.
  int interface() const noexcept { return interface_; }

 private:
  int interface_;
};

/// A configured resource cap would be exceeded.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Message exchange between sweep workers failed or timed out.
class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ttint
