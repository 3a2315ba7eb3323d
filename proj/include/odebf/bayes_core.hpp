/**
 * @file bayes_core.hpp
 * @brief Priors, Gaussian likelihoods over exact or numerical forward maps, and posteriors.
 *
 * Everything is computed in log space. A parameter point phi = (theta, sigma);
 * sigma is either fixed by the dataset or appended as the last sampled coordinate.
 */
#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "odebf/ode_core.hpp"

namespace odebf {

struct ParamVector {
  std::vector<double> theta;
  double sigma = 1.0;
};

struct Dataset {
  std::vector<double> times;
  std::vector<double> values;
  std::optional<double> sigma_fixed;

  std::size_t size() const noexcept { return times.size(); }
  /// Throws std::invalid_argument / NonMonotoneTimes on violated invariants.
  void validate() const;
  /// Rows [first, size) as a new dataset.
  Dataset tail(std::size_t first) const;
};

// ---------------------------------------------------------------- priors

struct GammaPrior {
  double shape = 1.0;
  double rate = 1.0;
};

struct NormalPrior {
  double mean = 0.0;
  double sd = 1.0;
};

struct UniformPrior {
  double lower = 0.0;
  double upper = 1.0;
};

using PriorComponent = std::variant<GammaPrior, NormalPrior, UniformPrior>;

/// Normalized log density; -inf outside the support.
double log_density(const PriorComponent& component, double x);
double prior_mean(const PriorComponent& component);
/// Quantile function, used to bracket posterior searches.
double prior_quantile(const PriorComponent& component, double p);
std::string describe(const PriorComponent& component);

/**
 * @brief Independent prior over theta, optionally over sigma too.
 *
 * When `sigma` is empty the noise level must come from the dataset.
 */
struct Prior {
  std::vector<PriorComponent> theta;
  std::optional<PriorComponent> sigma;

  bool infers_sigma() const noexcept { return sigma.has_value(); }
};

double log_prior(const Prior& prior, const ParamVector& phi);

// ---------------------------------------------------------------- forward maps

/// theta -> predicted observables at the dataset's times.
using ForwardMap = std::function<std::vector<double>(std::span<const double> theta)>;

/// Closed-form observable g(t, theta) evaluated at `times`.
ForwardMap exact_forward(std::function<double(double t, std::span<const double> theta)> oracle,
                         std::vector<double> times);

/**
 * @brief Numerical forward map f(X^h_theta(t_i)) from a fixed-step solver.
 *
 * Grid alignment of `times` is checked here, at construction, so misaligned h
 * is rejected before any sampling starts (GridMismatch).
 */
ForwardMap solver_forward(OdeSystem system, SolverConfig config, double t0,
                          std::vector<double> times);

// ---------------------------------------------------------------- likelihood / posterior

/// Gaussian log likelihood. Solver failure (NonFiniteState) maps to -inf.
double log_likelihood(const Dataset& data, const ParamVector& phi, const ForwardMap& forward);

double log_posterior_unnorm(const Dataset& data, const Prior& prior, const ParamVector& phi,
                            const ForwardMap& forward);

/// R_h(phi) = exp(loglik_h - loglik_exact).
double likelihood_ratio_Rh(const Dataset& data, const ParamVector& phi,
                           const ForwardMap& numerical, const ForwardMap& exact);

/// max_i |f(X^h(t_i)) - f(X(t_i))|.
double max_observation_discrepancy(std::span<const double> theta, const ForwardMap& numerical,
                                   const ForwardMap& exact);

/**
 * @brief Unnormalized posterior over the flat sampling vector.
 *
 * Flat layout: theta coordinates, then sigma when the prior infers it.
 */
class Posterior {
 public:
  Posterior(Dataset data, Prior prior, ForwardMap forward);

  std::size_t dim() const noexcept;
  ParamVector unpack(std::span<const double> flat) const;
  std::vector<double> pack(const ParamVector& phi) const;

  double log_likelihood(std::span<const double> flat) const;
  double log_prior(std::span<const double> flat) const;
  /// log_likelihood + log_prior; equals -U for the MCMC energy.
  double log_density(std::span<const double> flat) const;

  const Dataset& data() const noexcept { return data_; }
  const Prior& prior() const noexcept { return prior_; }
  const ForwardMap& forward() const noexcept { return forward_; }

 private:
  Dataset data_;
  Prior prior_;
  ForwardMap forward_;
};

}  // namespace odebf
