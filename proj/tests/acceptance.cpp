// Acceptance checks: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "odebf/bayes_core.hpp"
#include "odebf/bf_regress.hpp"
#include "odebf/errors.hpp"
#include "odebf/evidence.hpp"
#include "odebf/harness.hpp"
#include "odebf/logmath.hpp"
#include "odebf/mcmc.hpp"
#include "odebf/models.hpp"
#include "odebf/ode_core.hpp"

using namespace odebf;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

ExperimentSpec example(const std::string& name) { return load_spec(fs::path(ODEBF_SOURCE_DIR) / "specs" / name); }

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("odebf_acceptance_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

double quad_log_marginal(const ExperimentSpec& spec, const Dataset& data, std::optional<SolverConfig> solver) {
  const auto post = make_posterior(spec, data, solver);
  return quadrature_marginal(post, auto_grid_1d(post)).log_marginal;
}

// ------------------------------------------------------------------ 1

Outcome solver_orders() {
  const auto sys = make_logistic_system();
  const std::vector<double> theta{1.0};
  const std::vector<double> hs{0.1, 0.05, 0.025, 0.0125};
  auto oracle = [](double t) { return StateVector{logistic_exact(t, {})}; };
  const double pe = estimate_order(sys, theta, Method::Euler, hs, 0.0, 10.0, oracle);
  const double p2 = estimate_order(sys, theta, Method::RK2, hs, 0.0, 10.0, oracle);
  const double p4 = estimate_order(sys, theta, Method::RK4, hs, 0.0, 10.0, oracle);
  const bool ok = std::abs(pe - 1.0) <= 0.1 && std::abs(p2 - 2.0) <= 0.2 && std::abs(p4 - 4.0) <= 0.3;
  return {ok, fmt("Euler %.3f, RK2 %.3f, RK4 %.3f", pe, p2, p4)};
}

// ------------------------------------------------------------------ 2

// y_i ~ N(theta, 1), theta ~ N(0.5, 2^2).
Outcome conjugate_oracle() {
  const std::size_t n = 10;
  const double sigma = 1.0, m0 = 0.5, s0 = 2.0;
  int within = 0, hm_larger = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Dataset d;
    std::mt19937_64 rng(1000 + seed);
    std::normal_distribution<double> noise(0.0, sigma);
    for (std::size_t i = 0; i < n; ++i) {
      d.times.push_back(static_cast<double>(i));
      d.values.push_back(0.8 + noise(rng));
    }
    d.sigma_fixed = sigma;
    Prior prior;
    prior.theta = {NormalPrior{m0, s0}};
    const Posterior post(d, prior, [n](std::span<const double> th) { return std::vector<double>(n, th[0]); });

    const double s2 = sigma * sigma, t2 = s0 * s0;
    double sr = 0.0, srr = 0.0, sy = 0.0;
    for (double y : d.values) {
      sr += y - m0;
      srr += (y - m0) * (y - m0);
      sy += y;
    }
    const double nn = static_cast<double>(n);
    const double truth = -0.5 * nn * kLogTwoPi - 0.5 * ((nn - 1.0) * std::log(s2) + std::log(s2 + nn * t2)) -
                         0.5 * (srr - t2 / (s2 + nn * t2) * sr * sr) / s2;
    const double pv = 1.0 / (1.0 / t2 + nn / s2);
    const double pm = pv * (m0 / t2 + sy / s2);

    ProposalConfig p;
    p.step_scales = {2.4 * std::sqrt(pv)};
    const double x0[] = {pm};
    const auto chain = mh_run([&post](std::span<const double> x) { return post.log_density(x); }, x0, p, 20'000,
                              4'000, 77 + seed);
    KdeOptions kde;
    kde.seed = 300 + seed;
    const auto gd = gelfand_dey_kde(chain, kde);
    const auto hm = harmonic_mean(chain, [&post](std::span<const double> x) { return post.log_prior(x); });
    const double z = std::abs(gd.log_marginal - truth) / gd.mc_standard_error;
    worst = std::max(worst, z);
    within += z <= 3.0;
    hm_larger += hm.mc_standard_error > gd.mc_standard_error;
  }
  return {within == 20 && hm_larger == 20,
          fmt("%d/20 within 3 se (worst %.2f se), harmonic-mean se larger in %d/20", within, worst, hm_larger)};
}

// ------------------------------------------------------------------ 3

Outcome evidence_rate() {
  const auto spec = example("logistic_sigma1.json");
  const auto data = make_dataset(spec);
  const double exact = quad_log_marginal(spec, data, std::nullopt);
  auto gap = [&](Method m, double h) {
    return -std::expm1(quad_log_marginal(spec, data, make_solver_config(m, h)) - exact);
  };
  std::string detail = "RK4";
  bool ok = true;
  for (double h : {0.1, 0.05, 0.025}) {
    const double r = gap(Method::RK4, h) / gap(Method::RK4, h / 2);
    detail += fmt(" %g:%.2f", h, r);
    ok = ok && r >= 16.0 / 1.5 && r <= 16.0 * 1.5;
  }
  detail += "; Euler";
  for (double h : {0.003125, 0.0015625}) {
    const double r = gap(Method::Euler, h) / gap(Method::Euler, h / 2);
    detail += fmt(" %g:%.2f", h, r);
    ok = ok && r >= 2.0 / 1.5 && r <= 2.0 * 1.5;
  }
  return {ok, detail};
}

// ------------------------------------------------------------------ 4

double intercept_error(const ExperimentSpec& spec) {
  const auto rec = run_sweep(spec);
  if (!rec.curve || !rec.exact_log_marginal) return INFINITY;
  return std::abs(std::expm1(rec.curve->log_a() - *rec.exact_log_marginal));
}

Outcome table_analogue() {
  auto s1 = example("logistic_sigma1.json");
  auto s30 = example("logistic_sigma30.json");
  s1.h_grid = {0.2, 0.1, 0.05, 0.025};
  s30.h_grid = {0.4, 0.2, 0.1, 0.05};
  const double e1 = intercept_error(s1);
  const double e30 = intercept_error(s30);
  return {e1 <= 0.05 && e30 <= 0.10, fmt("sigma=1 %.3f%%, sigma=30 %.3f%%", 100 * e1, 100 * e30)};
}

// ------------------------------------------------------------------ 5

Outcome mean_discrepancy_rate() {
  const auto spec = example("logistic_sigma1.json");
  const auto data = make_dataset(spec);
  const auto exact = make_posterior(spec, data, std::nullopt);
  std::vector<double> dev;
  for (double h : {0.2, 0.1, 0.05}) {
    const auto post = make_posterior(spec, data, make_solver_config(Method::RK4, h));
    dev.push_back(posterior_discrepancy(post, exact, DiscrepancyStatistic::Mean));
  }
  bool ok = true;
  std::string detail = "halving ratios";
  for (std::size_t k = 0; k + 1 < dev.size(); ++k) {
    const double r = dev[k] / dev[k + 1];
    detail += fmt(" %.2f", r);
    ok = ok && r >= 16.0 / 1.5 && r <= 16.0 * 1.5;
  }
  return {ok, detail};
}

// ------------------------------------------------------------------ 6, 7

const std::vector<double> kSweepGrid{0.2, 0.1, 0.05, 0.025, 0.0125, 0.00625};

struct SweepResult {
  RunRecord sigma1;
  bool have = false;
};
SweepResult g_sweep;

Outcome indistinguishability() {
  auto spec = example("logistic_sigma1.json");
  spec.h_grid = kSweepGrid;
  g_sweep.sigma1 = run_sweep(spec);
  g_sweep.have = true;
  const auto& rec = g_sweep.sigma1;
  if (!rec.bf || !rec.bf->recommendation || !rec.tv_recommended_vs_finest) {
    return {false, "RK4 sweep produced no recommendation"};
  }
  const auto& r = *rec.bf->recommendation;
  double bf = 0.0;
  for (const auto& row : rec.bf->rows) {
    if (row.h == r.h) bf = row.bf;
  }
  const double tv = *rec.tv_recommended_vs_finest;
  const bool rk4_ok = r.h >= 0.05 && bf >= 0.99 && bf <= 1.0 / 0.99 && tv < 0.01 && r.speedup >= 5.0;

  auto euler = spec;
  euler.solver = Method::Euler;
  const auto erec = run_sweep(euler);
  std::string euler_outcome;
  bool euler_ok = false;
  if (!erec.curve) {
    euler_ok = true;
    euler_outcome = "no fit";
    for (const auto& w : erec.warnings) {
      if (w.find("IllConditionedFit") != std::string::npos) euler_outcome = "IllConditionedFit";
    }
  } else if (!erec.bf || !erec.bf->recommendation) {
    euler_ok = true;
    euler_outcome = "NoAdmissibleStep";
  } else {
    euler_ok = erec.bf->recommendation->h == kSweepGrid.back();
    euler_outcome = fmt("recommends h=%g", erec.bf->recommendation->h);
  }
  return {rk4_ok && euler_ok, fmt("RK4 h=%g BF %.4f TV %.4f speedup %.1fx; Euler %s", r.h, bf, tv, r.speedup,
                                  euler_outcome.c_str())};
}

Outcome sigma_dependence() {
  if (!g_sweep.have || !g_sweep.sigma1.bf || !g_sweep.sigma1.bf->recommendation) {
    return {false, "sigma=1 recommendation unavailable"};
  }
  auto spec = example("logistic_sigma30.json");
  spec.h_grid = kSweepGrid;
  const auto rec = run_sweep(spec);
  if (!rec.bf || !rec.bf->recommendation) return {false, "sigma=30 sweep produced no recommendation"};
  const double h1 = g_sweep.sigma1.bf->recommendation->h, h30 = rec.bf->recommendation->h;
  return {h30 >= h1, fmt("sigma=30 h=%g, sigma=1 h=%g", h30, h1)};
}

// ------------------------------------------------------------------ 8

Outcome determinism() {
  const auto spec = example("logistic_sigma1.json");
  auto small = spec;
  small.h_grid = {0.2, 0.1, 0.05, 0.025};
  small.mcmc.iterations = 10'000;
  small.mcmc.burn_in = 2'000;
  const auto a = scratch("det_a"), b = scratch("det_b");
  SweepOptions opt;
  opt.output_dir = a;
  report(run_sweep(small, opt), a);
  opt.output_dir = b;
  opt.jobs = 2;
  report(run_sweep(small, opt), b);
  bool ok = true;
  std::string detail;
  for (const char* f : {"table.csv", "curve.csv"}) {
    const auto ta = slurp(a / f), tb = slurp(b / f);
    const bool same = !ta.empty() && ta == tb;
    ok = ok && same;
    detail += fmt("%s %s (%zu bytes) ", f, same ? "identical" : "differs", ta.size());
  }
  return {ok, detail};
}

// ------------------------------------------------------------------ 9

Outcome glucose_sanity() {
  GlucoseParams p;
  const double d0 = 200.0;
  const auto sys = make_glucose_system(p, 90.0, d0);
  const std::vector<double> theta{10.0};
  // Asymptotic regime h <= theta2: k >= 1.
  std::vector<double> err;
  for (int k = 1; k <= 5; ++k) {
    const double h = 0.25 * std::ldexp(1.0, -k);
    const auto traj = integrate(sys, theta, make_solver_config(Method::RK4, h), 0.0, 2.0);
    double e = 0.0;
    for (std::size_t n = 0; n < traj.grid.size(); ++n) {
      e = std::max(e, std::abs(traj.states[n][3] - d0 * std::exp(-traj.grid[n] / p.theta2)));
    }
    err.push_back(e);
  }
  bool d_ok = true;
  std::string detail = "D error ratios";
  for (std::size_t k = 0; k + 1 < err.size(); ++k) {
    const double r = err[k] / err[k + 1];
    detail += fmt(" %.1f", r);
    d_ok = d_ok && r >= 16.0 / 1.5 && r <= 16.0 * 1.5;
  }

  const auto spec = example("glucose.json");
  const auto rec = run_sweep(spec);
  const auto& runs = rec.runs;
  bool flat = runs.size() == 8 && rec.bf.has_value();
  if (flat) {
    const double q_fine = runs.back().quadrature_log_marginal.value_or(NAN);
    for (std::size_t k = 3; k < runs.size(); ++k) {
      const double q = runs[k].quadrature_log_marginal.value_or(NAN);
      const bool q_ok = std::abs(q - q_fine) <= -std::log(0.99);
      const bool mc_ok = rec.bf->rows[k].indistinguishable;
      flat = flat && runs[k].ok && q_ok && mc_ok;
    }
    detail += fmt("; BF k=0 %.3f, k=3 %.4f, k=7 %.4f", rec.bf->rows[0].bf, rec.bf->rows[3].bf, rec.bf->rows[7].bf);
    if (rec.bf->recommendation) detail += fmt("; recommended h=%g", rec.bf->recommendation->h);
  }
  return {d_ok && flat, detail};
}

struct Criterion {
  const char* name;
  double budget_seconds;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"solver orders", 5.0, solver_orders},
      {"evidence oracle agreement", 30.0, conjugate_oracle},
      {"evidence convergence rate", 120.0, evidence_rate},
      {"extrapolated marginal vs exact", 600.0, table_analogue},
      {"posterior mean discrepancy rate", 120.0, mean_discrepancy_rate},
      {"indistinguishability and speedup", 600.0, indistinguishability},
      {"noise level and step choice", 600.0, sigma_dependence},
      {"pipeline determinism", 600.0, determinism},
      {"glucose model sanity", 600.0, glucose_sanity},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto& c = criteria[i];
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < c.budget_seconds;
    const bool pass = out.pass && in_time;
    failures += !pass;
    std::printf("%s [%zu] %s: %s (%.1f s of %.0f s)\n", pass ? "PASS" : "FAIL", i + 1, c.name, out.detail.c_str(),
                secs, c.budget_seconds);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
