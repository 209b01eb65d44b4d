#include "ttint/ising.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace ttint::ising {

double log10_A(std::span<const double> x) {
  const std::size_t m = x.size();
  double s = 0;
  for (std::size_t i = 0; i < m; ++i) {
    double p = 1;
    for (std::size_t j = i; j < m; ++j) {
      p *= x[j];
      s += 2 * std::log10((1 - p) / (1 + p));
    }
  }
  return s;
}

double log10_B(std::span<const double> x) { return std::log10(eval_B<double>(x)); }

double log10_A_adaptive(std::span<const double> x) {
  const std::size_t m = x.size();
  double a = 1, lg = 0;
  bool log_mode = false;
  for (std::size_t i = 0; i < m; ++i) {
    double p = 1, num = 1, den = 1;
    if (log_mode) {
      for (std::size_t j = i; j < m; ++j) {
        p *= x[j];
        lg += 2 * std::log10((1 - p) / (1 + p));
      }
      continue;
    }
    for (std::size_t j = i; j < m; ++j) {
      p *= x[j];
      num *= 1 - p;
      den *= 1 + p;
    }
    const double r = num / den;
    a *= r * r;
    if (a < kLogSwitch) {
      if (a == 0) return -std::numeric_limits<double>::infinity();
      lg = std::log10(a);
      log_mode = true;
    }
  }
  return log_mode ? lg : std::log10(a);
}

Family parse_family(const std::string& name) {
  if (name == "C" || name == "c" || name == "ising-c") return Family::C;
  if (name == "D" || name == "d" || name == "ising-d") return Family::D;
  if (name == "E" || name == "e" || name == "ising-e") return Family::E;
  throw InputError("unknown Ising family '" + name + "'");
}

std::string to_string(Family f) {
  switch (f) {
    case Family::C: return "C";
    case Family::D: return "D";
    case Family::E: return "E";
  }
  return "D";
}

void IsingProblem::validate() const {
  if (d < 2) throw InputError("Ising integrals need d >= 2");
}

double integrand(const IsingProblem& problem, std::span<const double> x) {
  switch (problem.family) {
    case Family::C: return 2 * eval_B<double>(x);
    case Family::D: return 2 * eval_A<double>(x) * eval_B<double>(x);
    case Family::E: return 2 * eval_A<double>(x);
  }
  return 0;
}

double log10_integrand(const IsingProblem& problem, std::span<const double> x) {
  const double l2 = std::log10(2.0);
  switch (problem.family) {
    case Family::C: return l2 + log10_B(x);
    case Family::D: return l2 + log10_A_adaptive(x) + log10_B(x);
    case Family::E: return l2 + log10_A_adaptive(x);
  }
  return 0;
}

ScaledValue integrand_scaled(const IsingProblem& problem, std::span<const double> x) {
  const double lg = log10_integrand(problem, x);
  if (std::isinf(lg)) return {0, 0};
  const double e = std::floor(lg);
  return {std::pow(10.0, lg - e), static_cast<std::int64_t>(e)};
}

Integrand make_integrand(const IsingProblem& problem) {
  problem.validate();
  Integrand in;
  in.dimension = problem.dimension();
  if (problem.mode == EvalMode::Direct) {
    in.value = [problem](std::span<const Scalar> x) { return integrand(problem, x); };
    return in;
  }
  in.log10_value = [problem](std::span<const Scalar> x) { return log10_integrand(problem, x); };
  std::vector<double> centre(problem.dimension(), 0.5);
  in.reference_exponent = static_cast<std::int64_t>(std::floor(log10_integrand(problem, centre)));
  return in;
}

double delta_estimate(double d_a, int a, double d_b, int b) {
  if (!(d_a > 0) || !(d_b > 0)) throw InputError("delta estimate needs positive values");
  return delta_estimate_log10(std::log10(d_a), a, std::log10(d_b), b);
}

double delta_estimate_log10(double log10_a, int a, double log10_b, int b) {
  if (b == a) throw InputError("delta estimate needs distinct dimensions");
  if (!std::isfinite(log10_a) || !std::isfinite(log10_b)) throw InputError("delta estimate needs finite values");
  return std::pow(10.0, (log10_a - log10_b) / (b - a));
}

}  // namespace ttint::ising
