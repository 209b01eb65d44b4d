#include <catch_amalgamated.hpp>

#include <thread>

#include "helpers.hpp"
#include "ttint/ttcross.hpp"

using namespace ttint;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("oracle evaluates and counts", "[core]") {
  FunctionOracle c({4, 4, 4}, [](std::span<const int>) { return 3.0; });
  MultiIndex idx{1, 2, 3};
  CHECK(c(idx) == 3.0);

  // 1-based (2,3) is 0-based (1,2)
  FunctionOracle sum({5, 5}, [](std::span<const int> i) { return double(i[0] + 1 + i[1] + 1); });
  MultiIndex p{1, 2};
  CHECK(sum(p) == 5.0);

  sum.reset_count();
  for (int k = 0; k < 10; ++k) {
    MultiIndex q{k % 5, k / 5};
    sum(q);
  }
  CHECK(sum.eval_count() == 10);
}

TEST_CASE("oracle rejects bad indices", "[core]") {
  FunctionOracle f({3, 3}, [](std::span<const int>) { return 1.0; });
  MultiIndex out{0, 3}, neg{-1, 0}, short_idx{0};
  CHECK_THROWS_AS(f(out), InputError);
  CHECK_THROWS_AS(f(neg), InputError);
  CHECK_THROWS_AS(f(short_idx), InputError);
  CHECK_THROWS_AS(FunctionOracle({0}, [](std::span<const int>) { return 1.0; }), InputError);
}

TEST_CASE("copies share the counter", "[core]") {
  FunctionOracle f({2}, [](std::span<const int> i) { return double(i[0]); });
  FunctionOracle g = f;
  MultiIndex a{1};
  f(a);
  g(a);
  CHECK(f.eval_count() == 2);
}

TEST_CASE("split and join multi-indices", "[core]") {
  auto [l, r] = split_index({1, 2, 3, 4}, 2);
  CHECK(l == MultiIndex{1, 2});
  CHECK(r == MultiIndex{3, 4});
  CHECK(join_index(l, r) == MultiIndex{1, 2, 3, 4});
  auto [a, b] = split_index({7, 8}, 1);
  CHECK(a == MultiIndex{7});
  CHECK(b == MultiIndex{8});
  CHECK_THROWS_AS(split_index({5}, 1), InputError);
  CHECK_THROWS_AS(split_index({1, 2}, 0), InputError);
}

TEST_CASE("evaluator memoizes and counts callback work only", "[core]") {
  FunctionOracle f({10, 10}, [](std::span<const int> i) { return double(i[0] * 10 + i[1]); });
  Evaluator ev(f);
  std::vector<int> flat{1, 2, 3, 4, 1, 2, 1, 2};
  std::vector<Scalar> out(4);
  ev.evaluate(flat, out);
  CHECK(out == std::vector<Scalar>{12, 34, 12, 12});
  CHECK(f.eval_count() == 2);
  ev.evaluate(flat, out);
  CHECK(f.eval_count() == 2);

  EvaluatorOptions off;
  off.memoize = false;
  Evaluator raw(f, off);
  raw.evaluate(flat, out);
  CHECK(f.eval_count() == 6);
}

TEST_CASE("evaluator is safe under concurrent callers", "[core]") {
  FunctionOracle f({64, 64}, [](std::span<const int> i) { return std::sin(i[0] + 0.5 * i[1]); });
  EvaluatorOptions opt;
  opt.threads = 4;
  Evaluator ev(f, opt);
  std::vector<std::jthread> pool;
  std::atomic<int> bad{0};
  for (int t = 0; t < 4; ++t)
    pool.emplace_back([&, t] {
      std::vector<int> flat;
      for (int a = 0; a < 64; ++a)
        for (int b = 0; b < 64; ++b) {
          flat.push_back((a + t) % 64);
          flat.push_back(b);
        }
      std::vector<Scalar> out(flat.size() / 2);
      ev.evaluate(flat, out);
      for (std::size_t k = 0; k < out.size(); ++k)
        if (out[k] != std::sin(flat[2 * k] + 0.5 * flat[2 * k + 1])) ++bad;
    });
  pool.clear();
  CHECK(bad == 0);
  CHECK(f.eval_count() >= 64 * 64);
  CHECK(f.eval_count() <= 4 * 64 * 64);
}

TEST_CASE("nestedness check", "[core]") {
  NestedIndexSets s = NestedIndexSets::rank_one({3, 3, 3}, {1, 1, 1});
  CHECK(check_nestedness(s));
  s.left[1].push_back({2, 0});
  s.right[1].push_back({0});
  CHECK_FALSE(check_nestedness(s));
  NestedIndexSets bad = NestedIndexSets::rank_one({3, 3}, {1, 1});
  bad.left[0].push_back({1});
  bad.right[0].push_back({2});
  CHECK_THROWS_AS(bad.validate(), InputError);
}

TEST_CASE("rank-one model reproduces a separable tensor", "[core]") {
  std::vector<double> u{1, -2, 3, 0.5}, v{2, 1, -1};
  FunctionOracle f({4, 3}, [&](std::span<const int> i) { return u[i[0]] * v[i[1]]; });
  Evaluator ev(f);
  CrossState st = CrossState::start(ev, {0, 0});
  TTCrossModel m = st.model();
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 3; ++j) {
      MultiIndex idx{i, j};
      CHECK_THAT(tt_eval(m, idx), WithinAbs(u[i] * v[j], 1e-15));
    }
}

TEST_CASE("model rejects a singular intersection", "[core]") {
  FunctionOracle f({3, 3}, [](std::span<const int> i) { return double(i[0] * i[1]); });
  Evaluator ev(f);
  CrossState st = CrossState::start(ev, {0, 1});
  try {
    st.model();
    FAIL("expected a degeneracy error");
  } catch (const DegeneracyError& e) {
    CHECK(e.interface() == 0);
  }
}

TEST_CASE("model contraction matches full enumeration", "[core]") {
  testing::RandomTT t({3, 4, 3}, {2, 2}, 5);
  FunctionOracle f = t.oracle();
  CrossOptions opt;
  opt.rel_tol = 1e-13;
  CrossResult r = cross_interpolate(f, opt);
  std::vector<Vector> w{Vector::LinSpaced(3, 0.1, 0.3), Vector::LinSpaced(4, 1, 2), Vector::LinSpaced(3, -1, 1)};
  double brute = 0;
  testing::for_each_index({3, 4, 3}, [&](const MultiIndex& i) { brute += w[0](i[0]) * w[1](i[1]) * w[2](i[2]) * t(i); });
  CHECK_THAT(r.model.contract(w), WithinRel(brute, 1e-12));
}

TEST_CASE("convergence log enforces ordering", "[core]") {
  ConvergenceLog log;
  log.append({1, 1, 10, 0.5, 0, 1, 0.1, 1});
  CHECK_THROWS_AS(log.append({1, 1, 20, 0.5, 0, 1, 0.2, 1}), InputError);
  CHECK_THROWS_AS(log.append({2, 1, 5, 0.5, 0, 1, 0.2, 1}), InputError);
  log.append({2, 2, 10, 0.5, 0, 0, 0.2, 0});
  CHECK(log.size() == 2);
}
