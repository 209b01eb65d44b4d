#include "ttint/quadrature.hpp"

#include <cmath>
#include <numbers>

namespace ttint {

Rule1D gauss_legendre(int n) {
  if (n < 1 || n > 1025) throw InputError("Gauss-Legendre order must be in 1..1025");
  Rule1D r;
  r.nodes.resize(n);
  r.weights.resize(n);
  const double pi = std::numbers::pi;
  const int half = n / 2;
  for (int k = 0; k < half; ++k) {
    // Largest root first, t = (1 - x) / 2 increasing.
    double x = std::cos(pi * (k + 0.75) / (n + 0.5));
    double dp = 0;
    for (int it = 0; it < 20; ++it) {
      double p0 = 1, p1 = x;
      for (int j = 2; j <= n; ++j) {
        const double p2 = ((2.0 * j - 1) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) <= 1e-15) {
        // one more evaluation of the derivative at the converged root
        double q0 = 1, q1 = x;
        for (int j = 2; j <= n; ++j) {
          const double q2 = ((2.0 * j - 1) * x * q1 - (j - 1.0) * q0) / j;
          q0 = q1;
          q1 = q2;
        }
        dp = n * (x * q1 - q0) / (x * x - 1);
        break;
      }
    }
    const double w = 1.0 / ((1 - x * x) * dp * dp);
    r.nodes(k) = (1 - x) / 2;
    r.nodes(n - 1 - k) = (1 + x) / 2;
    r.weights(k) = w;
    r.weights(n - 1 - k) = w;
  }
  if (n % 2 == 1) {
    // P_n'(0) from the recurrence at x = 0.
    double p0 = 1, p1 = 0;
    for (int j = 2; j <= n; ++j) {
      const double p2 = (-(j - 1.0) * p0) / j;
      p0 = p1;
      p1 = p2;
    }
    const double dp = n * p0;
    r.nodes(half) = 0.5;
    r.weights(half) = 1.0 / (dp * dp);
  }
  return r;
}

QuadratureGrid QuadratureGrid::uniform(int dimension, int n) {
  if (dimension < 1) throw InputError("grid dimension must be positive");
  return from_sizes(std::vector<int>(dimension, n));
}

QuadratureGrid QuadratureGrid::from_sizes(const std::vector<int>& sizes) {
  if (sizes.empty()) throw InputError("grid dimension must be positive");
  QuadratureGrid g;
  for (int n : sizes) {
    Rule1D r = gauss_legendre(n);
    g.nodes.push_back(r.nodes);
    g.weights.push_back(r.weights);
  }
  return g;
}

std::vector<int> QuadratureGrid::modes() const {
  std::vector<int> m;
  for (const auto& v : nodes) m.push_back(static_cast<int>(v.size()));
  return m;
}

FunctionOracle weighted_oracle(PointFunction f, const QuadratureGrid& grid, bool fold,
                               const std::vector<Scalar>& weight_scale) {
  if (!f) throw InputError("integrand is empty");
  const int d = grid.dimension();
  if (!weight_scale.empty() && static_cast<int>(weight_scale.size()) != d)
    throw InputError("weight scale needs one entry per mode");
  std::vector<Vector> w = grid.weights;
  for (int k = 0; k < d && !weight_scale.empty(); ++k) w[k] *= weight_scale[k];
  auto nodes = grid.nodes;
  return FunctionOracle(grid.modes(), [f = std::move(f), nodes, w, fold, d](std::span<const int> idx) {
    thread_local std::vector<Scalar> x;
    x.resize(d);
    Scalar prod = 1;
    for (int k = 0; k < d; ++k) {
      x[k] = nodes[k](idx[k]);
      if (fold) prod *= w[k](idx[k]);
    }
    return prod * f(std::span<const Scalar>(x));
  });
}

Scalar tt_integrate(const TTCrossModel& model, const QuadratureGrid& grid, bool folded) {
  if (model.mode_sizes() != grid.modes()) throw InputError("model modes do not match the grid");
  if (folded) {
    std::vector<Vector> unit;
    for (int n : grid.modes()) unit.push_back(Vector::Ones(n));
    return model.contract(unit);
  }
  return model.contract(grid.weights);
}

Scalar IntegralResult::value() const { return estimate * std::pow(Scalar(10), Scalar(exponent_offset)); }

double IntegralResult::log10_value() const {
  return std::log10(std::abs(static_cast<double>(estimate))) + static_cast<double>(exponent_offset);
}

std::pair<Scalar, std::int64_t> IntegralResult::normalized() const {
  if (estimate == 0) return {0, 0};
  const double lg = log10_value();
  const auto e = static_cast<std::int64_t>(std::floor(lg));
  Scalar m = estimate * std::pow(Scalar(10), Scalar(exponent_offset - e));
  return {m, e};
}

IntegralResult integrate(const Integrand& f, const IntegrateOptions& options) {
  if (f.dimension < 1) throw InputError("integration dimension must be positive");
  if (!f.value && !f.log10_value) throw InputError("integrand is empty");
  const int d = f.dimension;
  QuadratureGrid grid = QuadratureGrid::uniform(d, options.n);
  const bool log_mode = static_cast<bool>(f.log10_value);

  // Folded weights are scaled by n so entries stay the size of f; the factor
  // n^{-d} goes back in after contraction.
  std::vector<Scalar> scale(d, options.fold ? Scalar(options.n) : Scalar(1));
  FunctionOracle oracle = [&] {
    if (!log_mode) return weighted_oracle(f.value, grid, options.fold, scale);
    std::vector<Vector> lw(d);
    for (int k = 0; k < d; ++k)
      lw[k] = options.fold ? Vector((grid.weights[k] * scale[k]).array().log10()) : Vector::Zero(options.n);
    auto nodes = grid.nodes;
    const double e0 = static_cast<double>(f.reference_exponent);
    return FunctionOracle(grid.modes(), [g = f.log10_value, nodes, lw, d, e0](std::span<const int> idx) {
      thread_local std::vector<Scalar> x;
      x.resize(d);
      Scalar lsum = -e0;
      for (int k = 0; k < d; ++k) {
        x[k] = nodes[k](idx[k]);
        lsum += lw[k](idx[k]);
      }
      lsum += g(std::span<const Scalar>(x));
      return std::pow(Scalar(10), lsum);
    });
  }();

  ParallelOptions po;
  po.workers = options.workers;
  CrossOptions& co = po.cross;
  co.strategy = options.strategy;
  co.rel_tol = options.rel_tol;
  co.max_rank = options.max_rank;
  co.max_sweeps = options.max_sweeps;
  co.seed = options.seed;
  co.initial_rank = options.initial_rank;
  co.evaluator.threads = options.threads;
  co.evaluator.memoize = options.memoize;
  if (!options.fold) co.weights = grid.weights;

  ParallelResult pr;
  if (options.strategy == Strategy::Greedy) {
    pr = parallel_cross_interpolate(oracle, po);
  } else {
    static_cast<CrossResult&>(pr) = cross_interpolate(oracle, co);
  }

  // Scale back: factor n^{-d} (folded) times 10^{reference_exponent}.
  const double log_factor = options.fold ? -d * std::log10(double(options.n)) : 0.0;
  std::int64_t offset = 0;
  Scalar mult = 1;
  if (log_mode) {
    const double total = log_factor;
    const double fl = std::floor(total);
    offset = static_cast<std::int64_t>(fl) + f.reference_exponent;
    mult = std::pow(Scalar(10), Scalar(total - fl));
  } else {
    mult = std::pow(Scalar(10), Scalar(log_factor));
  }

  IntegralResult res;
  res.model = std::move(pr.model);
  res.estimate = tt_integrate(res.model, grid, options.fold) * mult;
  res.exponent_offset = offset;
  res.n_eval = pr.n_eval;
  res.converged = pr.converged;
  res.ranks = res.model.ranks();
  res.workers = pr.workers;
  res.messages = pr.messages;
  for (ConvergenceRecord r : pr.log.records()) {
    r.estimate *= mult;
    r.exponent_offset = offset;
    res.log.append(r);
  }
  return res;
}

IntegralResult integrate(PointFunction f, int dimension, const IntegrateOptions& options) {
  Integrand in;
  in.dimension = dimension;
  in.value = std::move(f);
  return integrate(in, options);
}

}  // namespace ttint
