#include "ttint/selftest.hpp"

#include <chrono>
#include <cmath>
#include <memory>
#include <random>
#include <sstream>

#include "ttint/baselines.hpp"
#include "ttint/ising.hpp"
#include "ttint/parcross.hpp"
#include "ttint/quadrature.hpp"

namespace ttint {

FunctionOracle random_tt_oracle(const std::vector<int>& modes, const std::vector<int>& ranks, std::uint64_t seed) {
  const int d = static_cast<int>(modes.size());
  if (static_cast<int>(ranks.size()) != d - 1) throw InputError("need d - 1 bond ranks");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  auto cores = std::make_shared<std::vector<std::vector<Matrix>>>(d);
  for (int k = 0; k < d; ++k) {
    const int rl = k == 0 ? 1 : ranks[k - 1];
    const int rr = k == d - 1 ? 1 : ranks[k];
    for (int i = 0; i < modes[k]; ++i) {
      Matrix m(rl, rr);
      for (Index a = 0; a < m.size(); ++a) m.data()[a] = g(rng);
      (*cores)[k].push_back(std::move(m));
    }
  }
  return FunctionOracle(modes, [cores](std::span<const int> idx) {
    RowVector v = (*cores)[0][idx[0]];
    for (std::size_t k = 1; k < cores->size(); ++k) v = v * (*cores)[k][idx[k]];
    return v(0);
  });
}

namespace {

using Clock = std::chrono::steady_clock;

std::string sci(double v) {
  std::ostringstream s;
  s.precision(3);
  s << std::scientific << v;
  return s.str();
}

double exhaustive_error(const TTCrossModel& model, const FunctionOracle& oracle) {
  const std::vector<int>& modes = oracle.mode_sizes();
  MultiIndex idx(modes.size(), 0);
  double err = 0, scale = 0;
  while (true) {
    const double e = oracle.evaluate_unchecked(idx);
    scale = std::max(scale, std::abs(e));
    err = std::max(err, std::abs(e - model(idx)));
    std::size_t k = 0;
    while (k < modes.size() && ++idx[k] == modes[k]) idx[k++] = 0;
    if (k == modes.size()) break;
  }
  return err / scale;
}

CheckResult exact_rank_recovery() {
  double worst = 0;
  bool nested = true;
  for (std::uint64_t s = 0; s < 5; ++s) {
    FunctionOracle f = random_tt_oracle({6, 6, 6, 6, 6}, {2, 3, 3, 2}, 100 + s);
    CrossOptions o;
    o.rel_tol = 1e-13;
    o.seed = s + 1;
    CrossResult r = cross_interpolate(f, o);
    worst = std::max(worst, exhaustive_error(r.model, f));
    nested = nested && r.model.ranks() == std::vector<Index>({2, 3, 3, 2});
  }
  return {"exact-rank recovery d=5 n=6", worst <= 1e-11 && nested, "max rel error " + sci(worst)};
}

CheckResult gauss_legendre_exactness() {
  double worst = 0;
  for (int n = 1; n <= 64; ++n) {
    Rule1D r = gauss_legendre(n);
    for (int p = 0; p <= 2 * n - 1; ++p) {
      const double q = (r.weights.array() * r.nodes.array().pow(p)).sum();
      worst = std::max(worst, std::abs(q - 1.0 / (p + 1)));
    }
  }
  return {"Gauss-Legendre monomials n<=64", worst <= 1e-14, "max abs error " + sci(worst)};
}

CheckResult closed_forms() {
  IntegrateOptions o;
  o.n = 17;
  o.rel_tol = 1e-12;
  const double want[3] = {1.0, 1.0 / 3.0, 6.0 - 8.0 * std::log(2.0)};
  const ising::Family fam[3] = {ising::Family::C, ising::Family::D, ising::Family::E};
  double worst = 0;
  for (int k = 0; k < 3; ++k) {
    IntegralResult r = integrate(ising::make_integrand({fam[k], 2, ising::EvalMode::Direct}), o);
    worst = std::max(worst, std::abs(r.value() - want[k]) / want[k]);
  }
  return {"C_2, D_2, E_2 closed forms", worst <= 1e-11, "max rel error " + sci(worst)};
}

CheckResult delta_from_reference() {
  const double delta = ising::delta_estimate(3.8211244448448883e-90, 128, 1.7384804312816220e-180, 256);
  return {"delta from D_128, D_256", std::abs(delta - 5.0792202) < 5e-8, "delta " + std::to_string(delta)};
}

CheckResult parallel_agreement(int workers) {
  IntegrateOptions o;
  o.n = 17;
  o.rel_tol = 1e-10;
  Integrand f = ising::make_integrand({ising::Family::D, 8, ising::EvalMode::Direct});
  const double ref = integrate(f, o).value();
  double worst = 0;
  for (int p = 2; p <= std::max(2, workers); ++p) {
    o.workers = p;
    worst = std::max(worst, std::abs(integrate(f, o).value() - ref) / std::abs(ref));
  }
  return {"parallel agreement D_8", worst <= 1e-9, "max rel spread " + sci(worst)};
}

CheckResult log_mode_agreement() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0, 1);
  double worst = 0;
  for (int t = 0; t < 20; ++t) {
    std::vector<double> x(63);
    for (auto& v : x) v = u(rng) * 0.3;
    ising::IsingProblem p{ising::Family::D, 64, ising::EvalMode::Direct};
    const double direct = ising::integrand(p, x);
    const double lg = ising::log10_integrand(p, x);
    if (direct > 0) worst = std::max(worst, std::abs(std::pow(10.0, lg) / direct - 1));
  }
  return {"log-scaled vs direct D_64", worst <= 1e-12, "max rel error " + sci(worst)};
}

CheckResult lattice_periodicity() {
  LatticeRule rule;
  rule.q = {1, 3};
  const std::vector<double> shift = {0, 0};
  std::vector<double> pts = qmc_points(rule, 2, 4, shift);
  const std::vector<double> want = {0.25, 0.75, 0.5, 0.5, 0.75, 0.25, 0, 0};
  bool ok = pts == want;
  return {"lattice points q=(1,3) N=4", ok, ok ? "exact" : "mismatch"};
}

}  // namespace

std::vector<CheckResult> run_selftest(int workers) {
  std::vector<std::function<CheckResult()>> checks = {exact_rank_recovery, gauss_legendre_exactness, closed_forms,
                                                      delta_from_reference, log_mode_agreement, lattice_periodicity,
                                                      [workers] { return parallel_agreement(workers); }};
  std::vector<CheckResult> out;
  for (auto& c : checks) {
    const auto t0 = Clock::now();
    CheckResult r;
    try {
      r = c();
    } catch (const std::exception& e) {
      r = {"check " + std::to_string(out.size() + 1), false, e.what()};
    }
    r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace ttint
