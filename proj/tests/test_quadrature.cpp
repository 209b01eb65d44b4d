#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "ttint/ising.hpp"
#include "ttint/quadrature.hpp"

using namespace ttint;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// exp(c·x) products are separable; 1/(1+Σ a_k x_k) is not.
PointFunction smooth(std::vector<double> a) {
  return [a](std::span<const Scalar> x) {
    double s = 1;
    for (std::size_t k = 0; k < x.size(); ++k) s += a[k] * x[k];
    return 1.0 / s;
  };
}

}  // namespace

TEST_CASE("Gauss-Legendre small rules", "[quadrature]") {
  Rule1D r1 = gauss_legendre(1);
  CHECK(r1.nodes(0) == 0.5);
  CHECK(r1.weights(0) == 1.0);

  Rule1D r2 = gauss_legendre(2);
  const double h = 1 / (2 * std::sqrt(3.0));
  CHECK_THAT(r2.nodes(0), WithinAbs(0.5 - h, 1e-15));
  CHECK_THAT(r2.nodes(1), WithinAbs(0.5 + h, 1e-15));
  CHECK_THAT(r2.weights(0), WithinAbs(0.5, 1e-15));
  CHECK_THAT(r2.weights(1), WithinAbs(0.5, 1e-15));

  // Closed-form five-point rule on [-1, 1].
  Rule1D r5 = gauss_legendre(5);
  const double s = std::sqrt(10.0 / 7.0);
  const double x1 = std::sqrt(5 - 2 * s) / 3, x2 = std::sqrt(5 + 2 * s) / 3;
  const double w1 = (322 + 13 * std::sqrt(70.0)) / 900, w2 = (322 - 13 * std::sqrt(70.0)) / 900;
  const double nodes[5] = {(1 - x2) / 2, (1 - x1) / 2, 0.5, (1 + x1) / 2, (1 + x2) / 2};
  const double weights[5] = {w2 / 2, w1 / 2, 64.0 / 225, w1 / 2, w2 / 2};
  for (int i = 0; i < 5; ++i) {
    CHECK_THAT(r5.nodes(i), WithinAbs(nodes[i], 1e-15));
    CHECK_THAT(r5.weights(i), WithinAbs(weights[i], 1e-15));
  }
}

TEST_CASE("Gauss-Legendre range checks", "[quadrature]") {
  CHECK_THROWS_AS(gauss_legendre(0), InputError);
  CHECK_THROWS_AS(gauss_legendre(1026), InputError);
  CHECK_NOTHROW(gauss_legendre(1025));
}

TEST_CASE("monomials are integrated exactly up to degree 2n-1", "[quadrature][property]") {
  for (int n = 1; n <= 64; ++n) {
    Rule1D r = gauss_legendre(n);
    for (int p = 0; p <= 2 * n - 1; ++p) {
      const double q = (r.weights.array() * r.nodes.array().pow(p)).sum();
      CHECK_THAT(q, WithinAbs(1.0 / (p + 1), 1e-14));
    }
  }
}

TEST_CASE("rules are symmetric, increasing and normalized", "[quadrature][property]") {
  for (int n : {1, 2, 3, 7, 16, 33, 64, 65, 129, 257, 513, 1025}) {
    Rule1D r = gauss_legendre(n);
    CHECK_THAT(r.weights.sum(), WithinAbs(1.0, 1e-14));
    for (int i = 0; i < n; ++i) {
      CHECK(r.nodes(i) > 0);
      CHECK(r.nodes(i) < 1);
      CHECK(r.weights(i) > 0);
      CHECK_THAT(r.nodes(i) + r.nodes(n - 1 - i), WithinAbs(1.0, 1e-14));
      CHECK(r.weights(i) == r.weights(n - 1 - i));
      if (i > 0) CHECK(r.nodes(i) > r.nodes(i - 1));
    }
  }
}

TEST_CASE("grid construction", "[quadrature]") {
  QuadratureGrid g = QuadratureGrid::from_sizes({3, 5, 2});
  CHECK(g.dimension() == 3);
  CHECK(g.modes() == std::vector<int>{3, 5, 2});
  CHECK(QuadratureGrid::uniform(4, 7).modes() == std::vector<int>(4, 7));
  CHECK_THROWS_AS(QuadratureGrid::uniform(0, 7), InputError);
}

TEST_CASE("weighted oracle entries", "[quadrature]") {
  auto one = [](std::span<const Scalar>) { return 1.0; };
  FunctionOracle b1 = weighted_oracle(one, QuadratureGrid::uniform(3, 1));
  CHECK(b1(MultiIndex{0, 0, 0}) == 1.0);

  FunctionOracle b2 = weighted_oracle(one, QuadratureGrid::uniform(1, 2));
  CHECK_THAT(b2(MultiIndex{0}), WithinAbs(0.5, 1e-15));
  CHECK_THAT(b2(MultiIndex{1}), WithinAbs(0.5, 1e-15));

  QuadratureGrid g = QuadratureGrid::uniform(2, 4);
  auto f = [](std::span<const Scalar> x) { return x[0] + 2 * x[1]; };
  FunctionOracle raw = weighted_oracle(f, g, false);
  FunctionOracle folded = weighted_oracle(f, g, true);
  FunctionOracle scaled = weighted_oracle(f, g, true, {4.0, 4.0});
  const MultiIndex idx{1, 3};
  const double a = g.nodes[0](1) + 2 * g.nodes[1](3);
  CHECK_THAT(raw(idx), WithinRel(a, 1e-15));
  CHECK_THAT(folded(idx), WithinRel(a * g.weights[0](1) * g.weights[1](3), 1e-15));
  CHECK_THAT(scaled(idx), WithinRel(16 * folded(idx), 1e-15));
  CHECK_THROWS_AS(weighted_oracle(f, g, true, {1.0}), InputError);
}

TEST_CASE("folded and unfolded contractions agree", "[quadrature][property]") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  for (int t = 0; t < 5; ++t) {
    PointFunction f = smooth({u(rng), u(rng), u(rng)});
    QuadratureGrid g = QuadratureGrid::uniform(3, 5);
    CrossOptions o;
    o.rel_tol = 1e-14;
    TTCrossModel a = cross_interpolate(weighted_oracle(f, g, false), o).model;
    TTCrossModel b = cross_interpolate(weighted_oracle(f, g, true), o).model;
    CHECK_THAT(tt_integrate(b, g, true), WithinRel(tt_integrate(a, g, false), 1e-13));
  }
}

TEST_CASE("separable integrand gives the product of 1D rules", "[quadrature]") {
  const int d = 6, n = 9;
  QuadratureGrid g = QuadratureGrid::uniform(d, n);
  auto f = [](std::span<const Scalar> x) {
    double v = 1;
    for (std::size_t k = 0; k < x.size(); ++k) v *= std::cos((k + 1) * 0.3 * x[k]);
    return v;
  };
  FunctionOracle b = weighted_oracle(f, g, true);
  CrossResult r = cross_interpolate(b, {});
  CHECK(r.model.sets().max_rank() == 1);
  double want = 1;
  for (int k = 0; k < d; ++k) {
    double s = 0;
    for (int i = 0; i < n; ++i) s += g.weights[k](i) * std::cos((k + 1) * 0.3 * g.nodes[k](i));
    want *= s;
  }
  CHECK_THAT(tt_integrate(r.model, g, true), WithinRel(want, 1e-13));
  // Against the exact integral Π sin(c_k)/c_k.
  double exact = 1;
  for (int k = 0; k < d; ++k) exact *= std::sin((k + 1) * 0.3) / ((k + 1) * 0.3);
  CHECK_THAT(tt_integrate(r.model, g, true), WithinRel(exact, 1e-13));
}

TEST_CASE("d=2 full cross equals the dense double sum", "[quadrature]") {
  const int n = 6;
  QuadratureGrid g = QuadratureGrid::uniform(2, n);
  auto f = [](std::span<const Scalar> x) { return std::exp(-x[0] * x[1]) / (1 + x[0] + x[1]); };
  NestedIndexSets s;
  s.modes = {n, n};
  s.left.resize(1);
  s.right.resize(1);
  for (int i = 0; i < n; ++i) {
    s.left[0].push_back({i});
    s.right[0].push_back({i});
  }
  FunctionOracle a = weighted_oracle(f, g, false);
  Evaluator ev(a);
  CrossState st;
  st.sets = s;
  st.rebuild(ev);
  TTCrossModel m = st.model();
  double want = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double x[2] = {g.nodes[0](i), g.nodes[1](j)};
      want += g.weights[0](i) * g.weights[1](j) * f(x);
    }
  CHECK_THAT(tt_integrate(m, g, false), WithinRel(want, 1e-13));
}

TEST_CASE("contraction equals the exhaustive weighted sum", "[quadrature]") {
  const int d = 4, n = 5;
  QuadratureGrid g = QuadratureGrid::uniform(d, n);
  PointFunction f = smooth({0.7, 0.3, 0.9, 0.5});
  FunctionOracle a = weighted_oracle(f, g, false);
  CrossOptions o;
  o.rel_tol = 1e-8;
  TTCrossModel m = cross_interpolate(a, o).model;
  double want = 0;
  testing::for_each_index(m.mode_sizes(), [&](const MultiIndex& idx) {
    double w = 1;
    for (int k = 0; k < d; ++k) w *= g.weights[k](idx[k]);
    want += w * m(idx);
  });
  const std::uint64_t before = a.eval_count();
  CHECK_THAT(tt_integrate(m, g, false), WithinRel(want, 1e-12));
  CHECK(a.eval_count() == before);
  CHECK_THROWS_AS(tt_integrate(m, QuadratureGrid::uniform(d, n + 1), false), InputError);
}

TEST_CASE("closed-form Ising integrals through the pipeline", "[quadrature]") {
  IntegrateOptions o;
  o.n = 17;
  o.rel_tol = 1e-12;
  using ising::Family;
  CHECK_THAT(integrate(ising::make_integrand({Family::C, 2}), o).value(), WithinRel(1.0, 1e-12));
  CHECK_THAT(integrate(ising::make_integrand({Family::D, 2}), o).value(), WithinRel(1.0 / 3.0, 1e-12));
  CHECK_THAT(integrate(ising::make_integrand({Family::E, 2}), o).value(),
             WithinRel(6.0 - 8.0 * std::log(2.0), 1e-12));
}

TEST_CASE("integrate on a smooth multivariate function", "[quadrature]") {
  // ∫ Π e^{x_k} = (e - 1)^d
  const int d = 10;
  IntegrateOptions o;
  o.n = 12;
  o.rel_tol = 1e-12;
  IntegralResult r = integrate(
      [](std::span<const Scalar> x) {
        double s = 0;
        for (double t : x) s += t;
        return std::exp(s);
      },
      d, o);
  CHECK(r.converged);
  CHECK_THAT(r.value(), WithinRel(std::pow(std::exp(1.0) - 1, d), 1e-13));
  CHECK(r.exponent_offset == 0);
  CHECK(r.log.size() >= 1);
  CHECK(r.n_eval == r.log.records().back().n_eval);

  o.fold = false;
  IntegralResult u = integrate(
      [](std::span<const Scalar> x) {
        double s = 0;
        for (double t : x) s += t;
        return std::exp(s);
      },
      d, o);
  CHECK_THAT(u.value(), WithinRel(r.value(), 1e-12));
}

TEST_CASE("strategies agree on a small problem", "[quadrature]") {
  IntegrateOptions o;
  o.n = 8;
  o.rel_tol = 1e-12;
  Integrand f = ising::make_integrand({ising::Family::C, 5});
  const double g = integrate(f, o).value();
  o.strategy = Strategy::Dmrg;
  CHECK_THAT(integrate(f, o).value(), WithinRel(g, 1e-10));
  o.strategy = Strategy::Als;
  o.initial_rank = 6;
  o.max_sweeps = 20;
  CHECK_THAT(integrate(f, o).value(), WithinRel(g, 1e-5));
}

TEST_CASE("D_8 matches the published value", "[quadrature][slow]") {
  IntegrateOptions o;
  o.n = 65;
  o.rel_tol = 1e-11;
  IntegralResult r = integrate(ising::make_integrand({ising::Family::D, 8}), o);
  CHECK(r.converged);
  CHECK_THAT(r.value(), WithinRel(1.8959911856917860e-5, 5e-11));
}

TEST_CASE("log-scaled mode carries the exponent offset", "[quadrature]") {
  IntegrateOptions o;
  o.n = 17;
  o.rel_tol = 1e-10;
  IntegralResult direct = integrate(ising::make_integrand({ising::Family::D, 12, ising::EvalMode::Direct}), o);
  IntegralResult scaled = integrate(ising::make_integrand({ising::Family::D, 12, ising::EvalMode::LogScaled}), o);
  CHECK(scaled.exponent_offset != 0);
  CHECK_THAT(scaled.log10_value(), WithinAbs(direct.log10_value(), 1e-9));
  auto [m, e] = scaled.normalized();
  CHECK(m >= 1);
  CHECK(m < 10);
  CHECK(e == -8);
}
