// ttint: integration jobs, MC/qMC baselines, self test and Δ estimates.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ttint/baselines.hpp"
#include "ttint/ising.hpp"
#include "ttint/quadrature.hpp"
#include "ttint/selftest.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace ttint;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitBudget = 2;
constexpr int kExitSelftest = 3;

using Clock = std::chrono::steady_clock;

struct JobConfig {
  std::string command;
  std::string problem = "ising-d";
  int d = 8;
  int n = 33;
  std::string strategy = "greedy";
  double rel_tol = 1e-10;
  long long max_rank = 1000;
  long long initial_rank = 1;
  int max_sweeps = 200;
  int workers = 1;
  int threads = 1;
  std::uint64_t seed = 1;
  bool log_scaled = false;
  std::string lattice;
  int log2_min = 10;
  int log2_max = 18;
  int repeats = 16;
  std::string out;
  std::string format = "both";
  std::vector<std::string> inputs;
  std::vector<std::string> values;
};

json to_json(const JobConfig& c) {
  return json{{"command", c.command},   {"problem", c.problem},     {"d", c.d},
              {"n", c.n},               {"strategy", c.strategy},   {"rel_tol", c.rel_tol},
              {"max_rank", c.max_rank}, {"initial_rank", c.initial_rank}, {"max_sweeps", c.max_sweeps}, {"workers", c.workers},
              {"threads", c.threads},   {"seed", c.seed},           {"log_scaled", c.log_scaled},
              {"lattice", c.lattice},   {"log2_min", c.log2_min},   {"log2_max", c.log2_max},
              {"repeats", c.repeats},   {"format", c.format}};
}

// Built-in problems. Ising labels use d as the integral index (dimension
// d - 1); the others integrate over [0,1]^d.
struct Problem {
  Integrand integrand;
  PointFunction point;
  std::optional<double> exact;
};

Problem make_problem(const JobConfig& c) {
  if (c.d < 1) throw InputError("--d must be positive");
  Problem p;
  if (c.problem.rfind("ising-", 0) == 0) {
    ising::IsingProblem ip{ising::parse_family(c.problem),
                           c.d, c.log_scaled ? ising::EvalMode::LogScaled : ising::EvalMode::Direct};
    p.integrand = ising::make_integrand(ip);
    p.point = [ip](std::span<const Scalar> x) { return ising::integrand(ip, x); };
    if (c.d == 2) {
      switch (ip.family) {
        case ising::Family::C: p.exact = 1.0; break;
        case ising::Family::D: p.exact = 1.0 / 3.0; break;
        case ising::Family::E: p.exact = 6.0 - 8.0 * std::numbers::ln2; break;
      }
    }
    return p;
  }
  if (c.problem == "product-exp") {
    // Π e^{x_k} / (e - 1), integral 1.
    const double norm = std::numbers::e - 1;
    p.point = [norm](std::span<const Scalar> x) {
      double v = 1;
      for (double t : x) v *= std::exp(t) / norm;
      return v;
    };
    p.exact = 1.0;
  } else if (c.problem == "inverse-sum") {
    p.point = [](std::span<const Scalar> x) {
      double s = 1;
      for (double t : x) s += t;
      return 1.0 / s;
    };
  } else if (c.problem == "constant") {
    p.point = [](std::span<const Scalar>) { return 1.0; };
    p.exact = 1.0;
  } else {
    throw InputError("unknown problem '" + c.problem + "' (ising-c, ising-d, ising-e, product-exp, inverse-sum, constant)");
  }
  p.integrand.dimension = c.d;
  p.integrand.value = p.point;
  return p;
}

fs::path output_base(const JobConfig& c, const std::string& fallback) {
  fs::path dir = ".";
  if (const char* env = std::getenv("TTINT_OUTPUT_DIR")) dir = env;
  fs::path base = c.out.empty() ? fs::path(fallback) : fs::path(c.out);
  if (base.is_relative()) base = dir / base;
  if (base.has_parent_path()) fs::create_directories(base.parent_path());
  return base;
}

bool want_json(const JobConfig& c) { return c.format == "json" || c.format == "both"; }
bool want_csv(const JobConfig& c) { return c.format == "csv" || c.format == "both"; }

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw InputError("cannot write " + path.string());
  f << text;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int cmd_integrate(const JobConfig& c) {
  Problem p = make_problem(c);
  IntegrateOptions o;
  o.n = c.n;
  o.strategy = parse_strategy(c.strategy);
  o.rel_tol = c.rel_tol;
  o.max_rank = c.max_rank;
  o.initial_rank = c.initial_rank;
  o.max_sweeps = c.max_sweeps;
  o.workers = c.workers;
  o.threads = c.threads;
  o.seed = c.seed;
  if (c.n < 1) throw InputError("--n must be positive");
  if (c.workers < 1 || c.threads < 1) throw InputError("--workers and --threads must be positive");

  const auto t0 = Clock::now();
  IntegralResult r = integrate(p.integrand, o);
  const double wall = std::chrono::duration<double>(Clock::now() - t0).count();
  const auto [mant, expo] = r.normalized();

  const fs::path base = output_base(c, "integrate_" + c.problem + "_d" + std::to_string(c.d));
  if (want_csv(c)) {
    std::ostringstream csv;
    csv << "sweep,max_rank,n_eval,estimate,exponent_offset,internal_rel_change,wall_s\n";
    for (const ConvergenceRecord& rec : r.log.records())
      csv << rec.sweep << ',' << rec.max_rank << ',' << rec.n_eval << ',' << fmt(rec.estimate) << ','
          << rec.exponent_offset << ',' << fmt(rec.rel_change) << ',' << fmt(rec.wall_seconds) << '\n';
    write_file(fs::path(base.string() + ".csv"), csv.str());
  }
  json summary{{"config", to_json(c)},
               {"estimate", r.estimate},
               {"exponent_offset", r.exponent_offset},
               {"mantissa", mant},
               {"exponent", expo},
               {"log10_value", r.log10_value()},
               {"n_eval", r.n_eval},
               {"converged", r.converged},
               {"sweeps", r.log.size()},
               {"ranks", r.ranks},
               {"workers", r.workers},
               {"messages", r.messages},
               {"wall_s", wall},
               {"core_hours", wall * c.workers * c.threads / 3600.0}};
  if (p.exact) summary["exact"] = *p.exact;
  if (want_json(c)) write_file(fs::path(base.string() + ".json"), summary.dump(2) + "\n");

  std::printf("%s d=%d n=%d: %.16ge%+lld  n_eval=%llu sweeps=%zu max_rank=%lld %s (%.2f s)\n", c.problem.c_str(), c.d,
              c.n, mant, static_cast<long long>(expo), static_cast<unsigned long long>(r.n_eval), r.log.size(),
              static_cast<long long>(r.ranks.empty() ? 1 : *std::max_element(r.ranks.begin(), r.ranks.end())), r.converged ? "converged" : "budget exhausted", wall);
  return r.converged ? kExitOk : kExitBudget;
}

int cmd_baseline(const JobConfig& c, bool qmc) {
  Problem p = make_problem(c);
  const int dim = p.integrand.dimension;
  if (c.log2_min < 1 || c.log2_max < c.log2_min || c.log2_max > 40) throw InputError("invalid --log2-min/--log2-max");
  if (c.repeats < 2) throw InputError("--repeats must be at least 2");
  LatticeRule rule;
  if (qmc) {
    if (c.lattice.empty()) throw InputError("baseline-qmc needs --lattice");
    if (!fs::exists(c.lattice)) throw InputError("lattice file not found: " + c.lattice);
    rule = LatticeRule::load(c.lattice);
    if (rule.dimension() < dim) throw InputError("lattice has fewer components than the dimension");
  }
  std::ostringstream csv;
  csv << "method,n_eval,mean,rel_std,wall_s\n";
  std::vector<double> ns, stds;
  json rows = json::array();
  for (int m = c.log2_min; m <= c.log2_max; ++m) {
    const std::uint64_t n = std::uint64_t{1} << m;
    const auto t0 = Clock::now();
    EstimateBatch b = qmc ? qmc_integrate(p.point, rule, dim, n, c.repeats, c.seed, c.threads)
                          : mc_batch(p.point, dim, n, c.repeats, c.seed, c.threads);
    const double wall = std::chrono::duration<double>(Clock::now() - t0).count();
    const double total = static_cast<double>(n) * c.repeats;
    csv << (qmc ? "qmc" : "mc") << ',' << n << ',' << fmt(b.mean) << ',' << fmt(b.rel_std) << ',' << fmt(wall) << '\n';
    rows.push_back({{"n_eval", n}, {"mean", b.mean}, {"rel_std", b.rel_std}, {"wall_s", wall}, {"total_eval", total}});
    if (b.rel_std > 0) {
      ns.push_back(static_cast<double>(n));
      stds.push_back(b.rel_std);
    }
    std::printf("%s N=2^%d mean=%.12g rel_std=%.3e (%.2f s)\n", qmc ? "qmc" : "mc", m, b.mean, b.rel_std, wall);
  }
  json summary{{"config", to_json(c)}, {"method", qmc ? "qmc" : "mc"}, {"rows", rows}};
  if (ns.size() >= 2) {
    const double slope = loglog_slope(ns, stds);
    summary["slope"] = slope;
    std::printf("fitted slope of rel_std vs N: %.3f\n", slope);
  } else {
    summary["slope"] = nullptr;
  }
  if (qmc) summary["lattice_source"] = rule.source;
  const fs::path base = output_base(c, std::string(qmc ? "qmc_" : "mc_") + c.problem + "_d" + std::to_string(c.d));
  if (want_csv(c)) write_file(fs::path(base.string() + ".csv"), csv.str());
  if (want_json(c)) write_file(fs::path(base.string() + ".json"), summary.dump(2) + "\n");
  return kExitOk;
}

int cmd_selftest(const JobConfig& c) {
  std::vector<CheckResult> results = run_selftest(std::max(2, c.workers));
  bool all = true;
  for (const CheckResult& r : results) {
    std::printf("%-4s %-34s %-28s %.2f s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str(), r.seconds);
    all = all && r.passed;
  }
  return all ? kExitOk : kExitSelftest;
}

// (label, log10 D) from "label:value" or from an integrate JSON summary.
std::pair<int, double> read_value(const std::string& spec) {
  if (fs::exists(spec)) {
    std::ifstream f(spec);
    json j = json::parse(f);
    return {j.at("config").at("d").get<int>(), j.at("log10_value").get<double>()};
  }
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw InputError("expected LABEL:VALUE or a result file, got '" + spec + "'");
  const int d = std::stoi(spec.substr(0, colon));
  const double v = std::stod(spec.substr(colon + 1));
  if (!(v > 0)) throw InputError("values must be positive");
  return {d, std::log10(v)};
}

int cmd_delta(const JobConfig& c) {
  std::vector<std::string> specs = c.inputs;
  specs.insert(specs.end(), c.values.begin(), c.values.end());
  if (specs.size() != 2) throw InputError("delta needs exactly two results");
  const auto [a, la] = read_value(specs[0]);
  const auto [b, lb] = read_value(specs[1]);
  const double delta = ising::delta_estimate_log10(la, a, lb, b);
  std::printf("Delta(%d, %d) = %.10g\n", a, b, delta);
  if (!c.out.empty() || std::getenv("TTINT_OUTPUT_DIR")) {
    json summary{{"config", to_json(c)}, {"a", a}, {"b", b}, {"log10_a", la}, {"log10_b", lb}, {"delta", delta}};
    write_file(fs::path(output_base(c, "delta").string() + ".json"), summary.dump(2) + "\n");
  }
  return kExitOk;
}

void add_problem_flags(CLI::App* cmd, JobConfig& c) {
  cmd->add_option("--problem", c.problem, "ising-c, ising-d, ising-e, product-exp, inverse-sum, constant");
  cmd->add_option("--d", c.d, "Ising index d (dimension d-1) or dimension of the other problems");
  cmd->add_option("--seed", c.seed, "Random seed");
  cmd->add_option("--threads", c.threads, "Concurrent evaluators");
  cmd->add_option("--out", c.out, "Output path prefix (relative to $TTINT_OUTPUT_DIR)");
  cmd->add_option("--format", c.format, "json, csv or both")->check(CLI::IsMember({"json", "csv", "both"}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tensor-train cross interpolation for high-dimensional integrals"};
  app.require_subcommand(1);
  JobConfig c;

  auto* integ = app.add_subcommand("integrate", "Integrate by cross interpolation on a Gauss-Legendre grid");
  add_problem_flags(integ, c);
  integ->add_option("--n", c.n, "Quadrature nodes per mode");
  integ->add_option("--tol", c.rel_tol, "Relative tolerance");
  integ->add_option("--strategy", c.strategy, "greedy, als or dmrg");
  integ->add_option("--max-rank", c.max_rank, "Rank cap");
  integ->add_option("--initial-rank", c.initial_rank, "Fixed rank of ALS runs");
  integ->add_option("--max-sweeps", c.max_sweeps, "Sweep cap");
  integ->add_option("--workers", c.workers, "Dimension-parallel workers P");
  integ->add_flag("--log-scaled", c.log_scaled, "Evaluate Ising integrands with exponent offsets");

  auto* mc = app.add_subcommand("baseline-mc", "Monte Carlo over N = 2^m points");
  auto* qmc = app.add_subcommand("baseline-qmc", "Randomly shifted rank-1 lattice over N = 2^m points");
  for (auto* cmd : {mc, qmc}) {
    add_problem_flags(cmd, c);
    cmd->add_option("--log2-min", c.log2_min, "Smallest log2 N");
    cmd->add_option("--log2-max", c.log2_max, "Largest log2 N");
    cmd->add_option("--repeats", c.repeats, "Independent estimates S per N");
  }
  qmc->add_option("--lattice", c.lattice, "Generating vector file");

  auto* self = app.add_subcommand("selftest", "Invariant and closed-form checks");
  self->add_option("--workers", c.workers, "Largest P in the agreement check");

  auto* delta = app.add_subcommand("delta", "Growth rate from two D results");
  delta->add_option("results", c.inputs, "Two integrate JSON summaries");
  delta->add_option("--value", c.values, "LABEL:VALUE, e.g. 128:3.82e-90");
  delta->add_option("--out", c.out, "Output path prefix");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    c.command = app.get_subcommands().front()->get_name();
    if (integ->parsed()) return cmd_integrate(c);
    if (mc->parsed()) return cmd_baseline(c, false);
    if (qmc->parsed()) return cmd_baseline(c, true);
    if (self->parsed()) return cmd_selftest(c);
    if (delta->parsed()) return cmd_delta(c);
  } catch (const InputError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInvalid;
  } catch (const json::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitBudget;
  }
  return kExitInvalid;
}
