#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <random>
#include <vector>

#include "odebf/bayes_core.hpp"
#include "odebf/errors.hpp"
#include "odebf/logmath.hpp"
#include "odebf/models.hpp"

using namespace odebf;

namespace {

std::vector<double> logistic_times() {
  std::vector<double> t;
  for (int i = 0; i <= 25; ++i) t.push_back(0.4 * i);
  return t;
}

ForwardMap logistic_exact_map(const std::vector<double>& times) {
  return exact_forward([](double t, std::span<const double> th) { return logistic_exact(t, {th[0], 1000.0, 100.0}); },
                       times);
}

ForwardMap logistic_solver_map(Method m, double h, const std::vector<double>& times) {
  return solver_forward(make_logistic_system(), make_solver_config(m, h), 0.0, times);
}

Dataset noisy_logistic(double sigma, std::uint64_t seed) {
  Dataset d;
  d.times = logistic_times();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, sigma);
  for (double t : d.times) d.values.push_back(logistic_exact(t, {}) + n(rng));
  d.sigma_fixed = sigma;
  return d;
}

}  // namespace

TEST_CASE("zero residual log likelihood") {
  Dataset d;
  d.times = logistic_times();
  for (double t : d.times) d.values.push_back(logistic_exact(t, {}));
  ParamVector phi{{1.0}, 1.0};
  CHECK(log_likelihood(d, phi, logistic_exact_map(d.times)) == doctest::Approx(-13.0 * kLogTwoPi).epsilon(1e-14));
}

TEST_CASE("one-sigma residual") {
  const double sigma = 2.5;
  Dataset d;
  d.times = {1.0};
  d.values = {logistic_exact(1.0, {}) + sigma};
  ParamVector phi{{1.0}, sigma};
  CHECK(log_likelihood(d, phi, logistic_exact_map(d.times)) ==
        doctest::Approx(-std::log(sigma) - 0.5 * kLogTwoPi - 0.5).epsilon(1e-13));
}

TEST_CASE("exact and RK4 h = 0.025 likelihoods agree at the truth") {
  const auto d = noisy_logistic(1.0, 3);
  ParamVector phi{{1.0}, 1.0};
  const double exact = log_likelihood(d, phi, logistic_exact_map(d.times));
  const double rk4 = log_likelihood(d, phi, logistic_solver_map(Method::RK4, 0.025, d.times));
  CHECK(std::abs(exact - rk4) < 1e-4);
}

TEST_CASE("solver failure maps to minus infinity") {
  Dataset d;
  d.times = {1.0};
  d.values = {0.0};
  const ForwardMap failing = [](std::span<const double> th) -> std::vector<double> {
    throw NonFiniteState(0.5, {th.begin(), th.end()}, 3);
  };
  CHECK(log_likelihood(d, ParamVector{{1.0}, 1.0}, failing) == kNegInf);
  CHECK(log_likelihood(d, ParamVector{{1.0}, 0.0}, logistic_exact_map(d.times)) == kNegInf);
}

TEST_CASE("prior log densities") {
  const PriorComponent g5{GammaPrior{5.0, 0.4}};
  CHECK(log_density(g5, 0.0) == kNegInf);
  CHECK(log_density(g5, -1.0) == kNegInf);
  CHECK(log_density(PriorComponent{GammaPrior{1.0, 1.0}}, 1.0) == doctest::Approx(-1.0).epsilon(1e-15));

  // Brute-force argmax on a fine grid sits at the mode (k - 1) / r = 10.
  double best_x = 0.0, best = kNegInf;
  for (double x = 0.01; x < 40.0; x += 0.01) {
    const double v = log_density(g5, x);
    if (v > best) {
      best = v;
      best_x = x;
    }
  }
  CHECK(best_x == doctest::Approx(10.0).epsilon(1e-3));

  CHECK(log_density(PriorComponent{NormalPrior{1.0, 2.0}}, 1.0) ==
        doctest::Approx(-0.5 * kLogTwoPi - std::log(2.0)));
  CHECK(log_density(PriorComponent{UniformPrior{0.0, 4.0}}, 5.0) == kNegInf);
  CHECK(log_density(PriorComponent{UniformPrior{0.0, 4.0}}, 1.0) == doctest::Approx(-std::log(4.0)));
  CHECK(prior_mean(g5) == doctest::Approx(12.5));
  CHECK(prior_quantile(PriorComponent{NormalPrior{0.0, 1.0}}, 0.975) == doctest::Approx(1.959964).epsilon(1e-6));
}

TEST_CASE("priors are normalized") {
  for (const PriorComponent& c : {PriorComponent{GammaPrior{5.0, 0.4}}, PriorComponent{GammaPrior{2.0, 2.0}},
                                  PriorComponent{NormalPrior{3.0, 0.5}}, PriorComponent{UniformPrior{-1.0, 2.0}}}) {
    const double lo = prior_quantile(c, 1e-12), hi = prior_quantile(c, 1.0 - 1e-12);
    const int n = 200000;
    double s = 0.0;
    for (int i = 0; i <= n; ++i) {
      const double x = lo + (hi - lo) * i / n;
      s += (i == 0 || i == n ? 0.5 : 1.0) * std::exp(log_density(c, x));
    }
    CHECK(s * (hi - lo) / n == doctest::Approx(1.0).epsilon(1e-4));
  }
}

TEST_CASE("log posterior is the sum of its parts") {
  const auto d = noisy_logistic(1.0, 5);
  Prior prior;
  prior.theta = {GammaPrior{2.0, 2.0}};
  const auto fwd = logistic_solver_map(Method::RK4, 0.1, d.times);
  for (double lambda : {0.5, 0.9, 1.0, 1.7}) {
    ParamVector phi{{lambda}, 1.0};
    CHECK(log_posterior_unnorm(d, prior, phi, fwd) == log_likelihood(d, phi, fwd) + log_prior(prior, phi));
  }
  CHECK(log_posterior_unnorm(d, prior, ParamVector{{-0.5}, 1.0}, fwd) == kNegInf);
}

TEST_CASE("likelihood is invariant to observation order") {
  const auto d = noisy_logistic(1.0, 8);
  Dataset shuffled = d;
  std::vector<std::size_t> perm(d.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = perm.size() - 1 - i;
  for (std::size_t i = 0; i < perm.size(); ++i) {
    shuffled.times[i] = d.times[perm[i]];
    shuffled.values[i] = d.values[perm[i]];
  }
  ParamVector phi{{1.05}, 1.0};
  const double a = log_likelihood(d, phi, logistic_exact_map(d.times));
  const double b = log_likelihood(shuffled, phi, logistic_exact_map(shuffled.times));
  CHECK(a == doctest::Approx(b).epsilon(1e-13));
}

TEST_CASE("likelihood scales correctly in sigma") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int rep = 0; rep < 20; ++rep) {
    Dataset d;
    std::vector<double> pred;
    for (int i = 0; i < 7; ++i) {
      d.times.push_back(i);
      d.values.push_back(n(rng));
      pred.push_back(n(rng));
    }
    const ForwardMap base = [pred](std::span<const double>) { return pred; };
    const double c = std::exp(n(rng));
    Dataset scaled = d;
    for (double& v : scaled.values) v *= c;
    const ForwardMap scaled_map = [pred, c](std::span<const double>) {
      auto out = pred;
      for (double& v : out) v *= c;
      return out;
    };
    const double sigma = 0.7;
    const double a = log_likelihood(d, ParamVector{{0.0}, sigma}, base);
    const double b = log_likelihood(scaled, ParamVector{{0.0}, sigma * c}, scaled_map);
    CHECK(b == doctest::Approx(a - 7.0 * std::log(c)).epsilon(1e-12));
  }
}

TEST_CASE("R_h tends to one with the RK4 rate") {
  const auto d = noisy_logistic(1.0, 2);
  ParamVector phi{{1.02}, 1.0};
  const auto exact = logistic_exact_map(d.times);
  std::vector<double> dev;
  for (double h : {0.2, 0.1, 0.05}) {
    dev.push_back(std::abs(likelihood_ratio_Rh(d, phi, logistic_solver_map(Method::RK4, h, d.times), exact) - 1.0));
  }
  CHECK(dev[1] < dev[0]);
  CHECK(dev[2] < dev[1]);
  CHECK(dev[1] / dev[2] == doctest::Approx(16.0).epsilon(0.5));
  const double euler = std::abs(likelihood_ratio_Rh(d, phi, logistic_solver_map(Method::Euler, 0.05, d.times), exact) - 1.0);
  CHECK(euler > 100.0 * dev[2]);
}

TEST_CASE("R_h and D_h follow the order law") {
  for (double sigma : {1.0, 30.0}) {
    const auto d = noisy_logistic(sigma, 4);
    ParamVector phi{{0.97}, sigma};
    const auto exact = logistic_exact_map(d.times);
    for (Method m : {Method::Euler, Method::RK2, Method::RK4}) {
      const std::vector<double> hs = m == Method::Euler ? std::vector<double>{0.0125, 0.00625, 0.003125}
                                                        : std::vector<double>{0.1, 0.05, 0.025};
      std::vector<double> lx, lr, ld;
      for (double h : hs) {
        const auto fwd = logistic_solver_map(m, h, d.times);
        lx.push_back(std::log(h));
        // |log R_h| rather than |R_h - 1|: at sigma = 1 Euler the ratio itself underflows to zero.
        lr.push_back(std::log(std::abs(log_likelihood(d, phi, fwd) - log_likelihood(d, phi, exact))));
        ld.push_back(std::log(max_observation_discrepancy(phi.theta, fwd, exact)));
      }
      CHECK(least_squares_slope(lx, lr) == doctest::Approx(order_of(m)).epsilon(0.4 / order_of(m)));
      CHECK(least_squares_slope(lx, ld) == doctest::Approx(order_of(m)).epsilon(0.4 / order_of(m)));
    }
  }
}

TEST_CASE("solver forward map rejects misaligned steps at construction") {
  CHECK_THROWS_AS(logistic_solver_map(Method::RK4, 0.3, logistic_times()), GridMismatch);
}

TEST_CASE("posterior packing and validation") {
  auto d = noisy_logistic(1.0, 1);
  Prior prior;
  prior.theta = {GammaPrior{2.0, 2.0}};
  const Posterior post(d, prior, logistic_exact_map(d.times));
  CHECK(post.dim() == 1);
  const double x[] = {1.1};
  CHECK(post.unpack(x).sigma == 1.0);
  CHECK(post.log_density(x) == post.log_likelihood(x) + post.log_prior(x));

  Prior with_sigma = prior;
  with_sigma.sigma = GammaPrior{2.0, 1.0};
  const Posterior post2(d, with_sigma, logistic_exact_map(d.times));
  CHECK(post2.dim() == 2);
  const double y[] = {1.1, 0.8};
  CHECK(post2.unpack(y).sigma == 0.8);
  CHECK(post2.pack(post2.unpack(y)) == std::vector<double>{1.1, 0.8});

  d.sigma_fixed.reset();
  CHECK_THROWS_AS(Posterior(d, prior, logistic_exact_map(d.times)), std::invalid_argument);

  Dataset bad;
  bad.times = {0.0, 1.0, 1.0};
  bad.values = {1.0, 2.0, 3.0};
  bad.sigma_fixed = 1.0;
  CHECK_THROWS_AS(bad.validate(), NonMonotoneTimes);
}
