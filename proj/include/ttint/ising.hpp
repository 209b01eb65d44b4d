#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>

#include "ttint/quadrature.hpp"

namespace ttint::ising {

inline constexpr double kEulerGamma = 0.5772156649015329;

/// Values below this switch A_d to log accumulation.
inline constexpr double kLogSwitch = 1e-280;

/// B_d(x_2..x_d) = 1 / ((1 + Σ_k x_2...x_k)(1 + Σ_k x_k...x_d)); `x` holds
/// x_2..x_d. O(d) with running products.
template <class T>
T eval_B(std::span<const T> x) {
  const std::size_t m = x.size();
  T fwd(1), bwd(1), s1(1), s2(1);
  for (std::size_t k = 0; k < m; ++k) {
    fwd = fwd * x[k];
    s1 = s1 + fwd;
    bwd = bwd * x[m - 1 - k];
    s2 = s2 + bwd;
  }
  return T(1) / (s1 * s2);
}

/// A_d = Π_{1<=i<j<=d} ((1 - x_{i+1}...x_j) / (1 + x_{i+1}...x_j))^2.
/// For each i the products grow in j; one division per i.
template <class T>
T eval_A(std::span<const T> x) {
  const std::size_t m = x.size();
  T a(1);
  for (std::size_t i = 0; i < m; ++i) {
    T p(1), num(1), den(1);
    for (std::size_t j = i; j < m; ++j) {
      p = p * x[j];
      num = num * (T(1) - p);
      den = den * (T(1) + p);
    }
    const T r = num / den;
    a = a * (r * r);
  }
  return a;
}

/// log10 A_d, accumulated term by term.
double log10_A(std::span<const double> x);
/// log10 B_d.
double log10_B(std::span<const double> x);

/// A_d that switches to log accumulation once the running product drops
/// below kLogSwitch. Returns log10 A_d.
double log10_A_adaptive(std::span<const double> x);

enum class Family { C, D, E };
enum class EvalMode { Direct, LogScaled };

Family parse_family(const std::string& name);
std::string to_string(Family f);

/// C_d = 2∫B_d, D_d = 2∫A_d B_d, E_d = 2∫A_d over [0,1]^{d-1}.
struct IsingProblem {
  Family family = Family::D;
  int d = 2;
  EvalMode mode = EvalMode::Direct;

  /// Integration dimension d - 1.
  int dimension() const noexcept { return d - 1; }
  void validate() const;
};

/// Integrand value including the factor 2 (direct mode).
double integrand(const IsingProblem& problem, std::span<const double> x);

/// log10 of the integrand.
double log10_integrand(const IsingProblem& problem, std::span<const double> x);

/// Mantissa and decimal exponent of the integrand (log-scaled mode).
struct ScaledValue {
  double mantissa = 0;
  std::int64_t exponent = 0;
};
ScaledValue integrand_scaled(const IsingProblem& problem, std::span<const double> x);

/// Integrand for integrate(); log-scaled problems carry a reference
/// exponent from the value at the cube centre.
Integrand make_integrand(const IsingProblem& problem);

/// Δ = (D_a / D_b)^{1/(b-a)}.
double delta_estimate(double d_a, int a, double d_b, int b);

/// Same from log10 values.
double delta_estimate_log10(double log10_a, int a, double log10_b, int b);

}  // namespace ttint::ising
