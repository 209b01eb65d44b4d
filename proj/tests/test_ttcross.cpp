#include <catch_amalgamated.hpp>

#include <limits>

#include "helpers.hpp"
#include "ttint/ttcross.hpp"

using namespace ttint;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

double fiber_error(const TTCrossModel& m, FunctionOracle& f) {
  // Max deviation over every stored fiber position.
  const auto& s = m.sets();
  const int d = m.dimension();
  double err = 0, scale = 0;
  for (int c = 0; c < d; ++c) {
    const std::vector<MultiIndex> none{MultiIndex{}};
    const auto& ls = c == 0 ? none : s.left[c - 1];
    const auto& rs = c == d - 1 ? none : s.right[c];
    for (const auto& l : ls)
      for (int i = 0; i < s.modes[c]; ++i)
        for (const auto& r : rs) {
          MultiIndex idx = l;
          idx.push_back(i);
          idx.insert(idx.end(), r.begin(), r.end());
          const double v = f(idx);
          scale = std::max(scale, std::abs(v));
          err = std::max(err, std::abs(v - m(idx)));
        }
  }
  return err / scale;
}

}  // namespace

TEST_CASE("superblock decoders", "[ttcross]") {
  FunctionOracle f({3, 4}, [](std::span<const int> i) { return double(10 * i[0] + i[1]); });
  Evaluator ev(f);
  NestedIndexSets s = NestedIndexSets::rank_one({3, 4}, {1, 1});
  Superblock sb = build_superblock(ev, s, 0);
  CHECK(sb.rows() == 3);
  CHECK(sb.cols() == 4);
  for (Index i = 0; i < 3; ++i)
    for (Index j = 0; j < 4; ++j) CHECK(sb(i, j) == 10 * i + j);

  NestedIndexSets t = NestedIndexSets::rank_one({3, 4, 5}, {0, 2, 4});
  FunctionOracle g({3, 4, 5}, [](std::span<const int> i) { return double(100 * i[0] + 10 * i[1] + i[2]); });
  Evaluator eg(g);
  Superblock sb0 = build_superblock(eg, t, 0);
  auto [i2, beta] = sb0.decode_col(3);
  CHECK(i2 == 3);
  CHECK(beta == 0);
  CHECK(sb0.right_part(3) == MultiIndex{3, 4});

  std::mt19937_64 rng(1);
  Superblock sb1 = build_superblock(eg, t, 1);
  std::uniform_int_distribution<Index> ri(0, sb1.rows() - 1), ci(0, sb1.cols() - 1);
  for (int k = 0; k < 100; ++k) {
    Index r = ri(rng), c = ci(rng);
    MultiIndex full = sb1.full_index(r, c);
    CHECK(sb1(r, c) == g(full));
  }
}

TEST_CASE("ALS sweep keeps ranks and stabilizes on a separable tensor", "[ttcross]") {
  FunctionOracle f({4, 4, 4}, [](std::span<const int> i) { return (1.0 + i[0]) * (2.0 + i[1]) * (1.0 + 0.5 * i[2]); });
  Evaluator ev(f);
  CrossState st = CrossState::start(ev, {1, 1, 1});
  SweepReport a = als_sweep(ev, st, SweepDirection::LeftToRight);
  SweepReport b = als_sweep(ev, st, SweepDirection::RightToLeft);
  CHECK(a.ranks == std::vector<Index>{1, 1});
  CHECK(b.ranks == std::vector<Index>{1, 1});
  SweepReport c = als_sweep(ev, st, SweepDirection::LeftToRight);
  CHECK(c.swaps == 0);
  TTCrossModel m = st.model();
  testing::for_each_index({4, 4, 4}, [&](const MultiIndex& i) { CHECK_THAT(m(i), WithinRel(f(i), 1e-14)); });
}

TEST_CASE("ALS sweep does not decrease intersection volume", "[ttcross]") {
  testing::RandomTT t({4, 4, 4}, {2, 2}, 8);
  FunctionOracle f = t.oracle();
  Evaluator ev(f);
  CrossState st = CrossState::random(ev, 2, 4);
  auto volumes = [&] {
    TTCrossModel m = st.model();
    std::vector<double> v;
    for (int q = 0; q < 2; ++q) v.push_back(std::abs(m.intersection(q).determinant()));
    return v;
  };
  std::vector<double> before = volumes();
  als_sweep(ev, st, SweepDirection::LeftToRight);
  std::vector<double> after = volumes();
  CHECK(after[0] >= before[0] * (1 - 1e-12));
  CHECK(st.sets.ranks() == std::vector<Index>{2, 2});
  CHECK(check_nestedness(st.sets));
}

TEST_CASE("truncated SVD", "[ttcross]") {
  CHECK(truncated_svd(Matrix::Identity(3, 3), 0).rank == 3);
  Vector u = Vector::LinSpaced(5, 1, 2), v = Vector::LinSpaced(4, -1, 3);
  CHECK(truncated_svd(u * v.transpose(), 1e-12).rank == 1);
  CHECK(truncated_svd(Matrix::Identity(3, 3), std::numeric_limits<double>::infinity()).rank == 1);

  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  Matrix a(10, 10);
  for (Index k = 0; k < a.size(); ++k) a.data()[k] = g(rng);
  for (double eps : {1e-1, 0.3, 0.6}) {
    TruncatedSvd t = truncated_svd(a, eps);
    Matrix rec = t.u * t.s.asDiagonal() * t.v.transpose();
    CHECK((a - rec).norm() <= eps * a.norm() * (1 + 1e-12));
  }
}

TEST_CASE("DMRG sweep recovers exact ranks", "[ttcross]") {
  testing::RandomTT t({4, 4, 4, 4}, {2, 3, 2}, 21);
  FunctionOracle f = t.oracle();
  Evaluator ev(f);
  CrossState st = CrossState::start(ev, {1, 1, 1, 1});
  SweepReport r1 = dmrg_maxvol_sweep(ev, st, 1e-12);
  SweepReport r2 = dmrg_maxvol_sweep(ev, st, 1e-12, SweepDirection::RightToLeft);
  SweepReport r3 = dmrg_maxvol_sweep(ev, st, 1e-12);
  CHECK(r3.ranks == std::vector<Index>{2, 3, 2});
  CHECK(check_nestedness(st.sets));
  CHECK(r1.superblock_evaluations <= r1.superblock_entries);
  CHECK(r3.superblock_evaluations <= r3.superblock_entries);
  CHECK(testing::max_rel_error(st.model(), t) <= 1e-11);
  (void)r2;
}

TEST_CASE("DMRG with infinite eps collapses to rank one", "[ttcross]") {
  FunctionOracle f = testing::smooth_oracle({5, 5, 5}, 3);
  Evaluator ev(f);
  CrossState st = CrossState::start(ev, {2, 2, 2});
  SweepReport r = dmrg_maxvol_sweep(ev, st, std::numeric_limits<double>::infinity());
  CHECK(r.ranks == std::vector<Index>{1, 1});
}

TEST_CASE("DMRG respects the superblock cap", "[ttcross]") {
  FunctionOracle f = testing::smooth_oracle({20, 20, 20}, 3);
  Evaluator ev(f);
  CrossState st = CrossState::start(ev, {2, 2, 2});
  CHECK_THROWS_AS(dmrg_maxvol_sweep(ev, st, 1e-6, SweepDirection::LeftToRight, 100), ResourceError);
}

TEST_CASE("greedy sweeps keep nestedness and grow ranks by at most one", "[ttcross]") {
  FunctionOracle f = testing::smooth_oracle({6, 6, 6, 6, 6}, 9);
  Evaluator ev(f);
  CrossState st = CrossState::start(ev, mid_grid(f.mode_sizes()));
  Scalar scale = 0;
  GreedyOptions opt;
  opt.step.rel_tol = 1e-14;
  for (int s = 0; s < 4; ++s) {
    const auto before = st.sets.ranks();
    greedy_sweep(ev, st, opt, 7, s, scale, s % 2 ? SweepDirection::RightToLeft : SweepDirection::LeftToRight);
    const auto after = st.sets.ranks();
    for (std::size_t q = 0; q < before.size(); ++q) CHECK(after[q] - before[q] <= 1);
    CHECK(st.sets.max_rank() <= s + 2);
    CHECK(check_nestedness(st.sets));
  }
}

TEST_CASE("greedy cross recovers an exact-rank tensor", "[ttcross]") {
  testing::RandomTT t({5, 5, 5, 5, 5}, {3, 3, 3, 3}, 31);
  FunctionOracle f = t.oracle();
  CrossOptions opt;
  opt.rel_tol = 1e-13;
  CrossResult r = cross_interpolate(f, opt);
  CHECK(r.converged);
  CHECK(r.model.ranks() == std::vector<Index>{3, 3, 3, 3});
  CHECK(testing::max_rel_error(r.model, t) <= 1e-11);
  CHECK(r.n_eval == f.eval_count());
  CHECK(check_nestedness(r.model.sets()));
}

TEST_CASE("greedy evaluation count is O(d n r^2)", "[ttcross]") {
  testing::RandomTT t({6, 6, 6, 6, 6, 6}, {3, 3, 3, 3, 3}, 37);
  FunctionOracle f = t.oracle();
  CrossOptions opt;
  opt.rel_tol = 1e-13;
  CrossResult r = cross_interpolate(f, opt);
  const double rmax = double(r.model.sets().max_rank());
  CHECK(double(r.n_eval) / (6.0 * 6.0 * rmax * rmax) < 8.0);
}

TEST_CASE("d=4 random TT matches full table", "[ttcross]") {
  testing::RandomTT t({3, 3, 3, 3}, {2, 2, 2}, 41);
  FunctionOracle f = t.oracle();
  CrossOptions opt;
  opt.rel_tol = 1e-13;
  CrossResult r = cross_interpolate(f, opt);
  CHECK(testing::max_rel_error(r.model, t) <= 1e-12);
}

TEST_CASE("interpolation property on a smooth oracle", "[ttcross]") {
  FunctionOracle f = testing::smooth_oracle({8, 8, 8, 8}, 13);
  CrossOptions opt;
  opt.rel_tol = 1e-10;
  CrossResult r = cross_interpolate(f, opt);
  CHECK(fiber_error(r.model, f) <= 1e-13);
}

TEST_CASE("converged model agrees with the full grid", "[ttcross]") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    FunctionOracle f = testing::smooth_oracle({6, 6, 6, 6, 6}, seed);
    CrossOptions opt;
    opt.rel_tol = 1e-9;
    CrossResult r = cross_interpolate(f, opt);
    CHECK(r.converged);
    CHECK(testing::max_rel_error(r.model, [&](std::span<const int> i) { return f(i); }) <= 10 * opt.rel_tol);
  }
}

TEST_CASE("ALS and DMRG drivers", "[ttcross]") {
  testing::RandomTT t({4, 4, 4, 4}, {2, 2, 2}, 43);
  FunctionOracle f = t.oracle();
  CrossOptions opt;
  opt.strategy = Strategy::Dmrg;
  opt.rel_tol = 1e-12;
  CrossResult r = cross_interpolate(f, opt);
  CHECK(r.converged);
  CHECK(testing::max_rel_error(r.model, t) <= 1e-10);

  CrossOptions als;
  als.strategy = Strategy::Als;
  als.initial_rank = 2;
  als.rel_tol = 1e-12;
  CrossResult a = cross_interpolate(f, als);
  CHECK(a.model.ranks() == std::vector<Index>{2, 2, 2});
  CHECK(testing::max_rel_error(a.model, t) <= 1e-10);
}

TEST_CASE("one-dimensional runs hold the whole fiber", "[ttcross]") {
  FunctionOracle f({7}, [](std::span<const int> i) { return 1.0 + i[0]; });
  CrossResult r = cross_interpolate(f, CrossOptions{});
  CHECK(r.converged);
  CHECK_THAT(r.functional, WithinRel(28.0, 1e-15));
}
