#include "ttint/baselines.hpp"

#include <cmath>
#include <fstream>
#include <regex>
#include <sstream>
#include <thread>

namespace ttint {

namespace {

// Sum of f over points [begin, end) produced by `point(i, x)`, evaluated in
// fixed chunks so the summation order does not depend on the thread count.
template <class Point>
Scalar chunked_mean(const PointFunction& f, int d, std::uint64_t n, int threads, Point point) {
  constexpr std::uint64_t kChunk = 4096;
  const std::uint64_t chunks = (n + kChunk - 1) / kChunk;
  std::vector<Scalar> partial(chunks);
  auto work = [&](std::uint64_t c0, std::uint64_t c1) {
    std::vector<Scalar> x(d), vals;
    for (std::uint64_t c = c0; c < c1; ++c) {
      const std::uint64_t b = c * kChunk, e = std::min(n, b + kChunk);
      vals.resize(e - b);
      for (std::uint64_t i = b; i < e; ++i) {
        point(i, x);
        vals[i - b] = f(std::span<const Scalar>(x));
      }
      partial[c] = pairwise_sum(vals);
    }
  };
  threads = std::max(1, threads);
  if (threads == 1 || chunks < 2) {
    work(0, chunks);
  } else {
    std::vector<std::jthread> pool;
    const std::uint64_t per = (chunks + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      const std::uint64_t b = t * per, e = std::min(chunks, b + per);
      if (b < e) pool.emplace_back(work, b, e);
    }
  }
  return pairwise_sum(partial) / static_cast<Scalar>(n);
}

}  // namespace

LatticeRule LatticeRule::parse(const std::string& text, std::string source) {
  LatticeRule rule;
  rule.source = std::move(source);
  std::istringstream in(text);
  std::string line;
  const std::regex header(R"(#\s*dim\s*=\s*(\d+)\s+n\s*=\s*(\d+).*)");
  std::int64_t declared_dim = -1;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    line = line.substr(first);
    if (line[0] == '#') {
      std::smatch m;
      if (std::regex_match(line, m, header)) {
        declared_dim = std::stoll(m[1]);
        rule.design_size = std::stoll(m[2]);
      }
      continue;
    }
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(line, &used);
    } catch (const std::exception&) {
      throw InputError(rule.source + ":" + std::to_string(lineno) + ": expected an integer");
    }
    if (line.find_first_not_of(" \t\r", used) != std::string::npos)
      throw InputError(rule.source + ":" + std::to_string(lineno) + ": trailing characters");
    if (v <= 0) throw InputError(rule.source + ":" + std::to_string(lineno) + ": generator entries must be positive");
    rule.q.push_back(v);
  }
  if (rule.q.empty()) throw InputError(rule.source + ": no generating vector entries");
  if (declared_dim >= 0 && declared_dim != static_cast<std::int64_t>(rule.q.size()))
    throw InputError(rule.source + ": header dim does not match the number of entries");
  return rule;
}

LatticeRule LatticeRule::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open lattice file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

Scalar pairwise_sum(std::span<const Scalar> v) {
  if (v.size() <= 8) {
    Scalar s = 0;
    for (Scalar x : v) s += x;
    return s;
  }
  const std::size_t h = v.size() / 2;
  return pairwise_sum(v.first(h)) + pairwise_sum(v.subspan(h));
}

Scalar mc_integrate(const PointFunction& f, int d, std::uint64_t n, std::uint64_t seed, std::uint64_t stream,
                    int threads) {
  if (n < 1) throw InputError("sample count must be positive");
  if (d < 1) throw InputError("dimension must be positive");
  const CounterRng rng(seed, stream);
  return chunked_mean(f, d, n, threads, [&](std::uint64_t i, std::vector<Scalar>& x) {
    for (int k = 0; k < d; ++k) x[k] = rng.uniform(i * static_cast<std::uint64_t>(d) + k);
  });
}

namespace {

void lattice_point(const LatticeRule& rule, int d, std::uint64_t n, std::span<const Scalar> shift, std::uint64_t i,
                   std::span<Scalar> x) {
  // i runs 1..N; (i q_k mod N) / N is exact in integers.
  for (int k = 0; k < d; ++k) {
    const auto iq = static_cast<std::uint64_t>((static_cast<unsigned __int128>(i) * static_cast<std::uint64_t>(rule.q[k])) % n);
    Scalar v = static_cast<Scalar>(iq) / static_cast<Scalar>(n) + shift[k];
    v -= std::floor(v);
    if (v >= 1) v = 0;
    x[k] = v;
  }
}

void check_lattice(const LatticeRule& rule, int d, std::uint64_t n, std::span<const Scalar> shift) {
  if (rule.dimension() < d) throw InputError("lattice rule has fewer components than the dimension");
  if (n < 1) throw InputError("point count must be positive");
  if (static_cast<int>(shift.size()) != d) throw InputError("shift needs one entry per dimension");
}

}  // namespace

std::vector<Scalar> qmc_points(const LatticeRule& rule, int d, std::uint64_t n, std::span<const Scalar> shift) {
  check_lattice(rule, d, n, shift);
  std::vector<Scalar> pts(n * d);
  for (std::uint64_t i = 1; i <= n; ++i)
    lattice_point(rule, d, n, shift, i, std::span<Scalar>(pts.data() + (i - 1) * d, d));
  return pts;
}

Scalar qmc_estimate(const PointFunction& f, const LatticeRule& rule, int d, std::uint64_t n,
                    std::span<const Scalar> shift, int threads) {
  check_lattice(rule, d, n, shift);
  return chunked_mean(f, d, n, threads, [&](std::uint64_t i, std::vector<Scalar>& x) {
    lattice_point(rule, d, n, shift, i + 1, x);
  });
}

StdEstimate std_estimate(std::span<const Scalar> e) {
  if (e.size() < 2) throw InputError("need at least two estimates");
  StdEstimate out;
  out.mean = pairwise_sum(e) / static_cast<Scalar>(e.size());
  std::vector<Scalar> sq(e.size());
  for (std::size_t j = 0; j < e.size(); ++j) sq[j] = (e[j] - out.mean) * (e[j] - out.mean);
  const Scalar sd = std::sqrt(pairwise_sum(sq) / static_cast<Scalar>(e.size() - 1));
  if (out.mean == 0) {
    out.rel_std = sd;
    out.absolute = true;
  } else {
    out.rel_std = sd / std::abs(out.mean);
  }
  return out;
}

namespace {

EstimateBatch finish(std::vector<Scalar> estimates, std::uint64_t n) {
  EstimateBatch b;
  StdEstimate s = std_estimate(estimates);
  b.estimates = std::move(estimates);
  b.mean = s.mean;
  b.rel_std = s.rel_std;
  b.absolute = s.absolute;
  b.n_per_estimate = n;
  return b;
}

}  // namespace

EstimateBatch qmc_integrate(const PointFunction& f, const LatticeRule& rule, int d, std::uint64_t n, int s,
                            std::uint64_t seed, int threads) {
  if (s < 2) throw InputError("need at least two shifts");
  const CounterRng rng(seed, 0x51F7);
  std::vector<Scalar> est(s), shift(d);
  for (int j = 0; j < s; ++j) {
    for (int k = 0; k < d; ++k) shift[k] = rng.uniform(static_cast<std::uint64_t>(j) * d + k);
    est[j] = qmc_estimate(f, rule, d, n, shift, threads);
  }
  return finish(std::move(est), n);
}

EstimateBatch mc_batch(const PointFunction& f, int d, std::uint64_t n, int s, std::uint64_t seed, int threads) {
  if (s < 2) throw InputError("need at least two repetitions");
  std::vector<Scalar> est(s);
  for (int j = 0; j < s; ++j) est[j] = mc_integrate(f, d, n, seed, static_cast<std::uint64_t>(j), threads);
  return finish(std::move(est), n);
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw InputError("slope fit needs matching series of length >= 2");
  double mx = 0, my = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

}  // namespace ttint
