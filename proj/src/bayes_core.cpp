#include "odebf/bayes_core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/normal.hpp>

#include "odebf/errors.hpp"
#include "odebf/logmath.hpp"

namespace odebf {

void Dataset::validate() const {
  if (times.empty()) throw std::invalid_argument("dataset needs at least one observation");
  if (times.size() != values.size()) {
    throw std::invalid_argument("dataset times and values differ in length");
  }
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!std::isfinite(times[i]) || !std::isfinite(values[i])) {
      throw std::invalid_argument("dataset contains non-finite entries");
    }
    if (i > 0 && !(times[i] > times[i - 1])) {
      throw NonMonotoneTimes("observation times must be strictly increasing");
    }
  }
  if (sigma_fixed && !(*sigma_fixed > 0.0)) {
    throw std::invalid_argument("fixed sigma must be positive");
  }
}

Dataset Dataset::tail(std::size_t first) const {
  if (first > times.size()) throw std::out_of_range("Dataset::tail");
  Dataset out;
  out.times.assign(times.begin() + static_cast<std::ptrdiff_t>(first), times.end());
  out.values.assign(values.begin() + static_cast<std::ptrdiff_t>(first), values.end());
  out.sigma_fixed = sigma_fixed;
  return out;
}

// ---------------------------------------------------------------- priors

namespace {

struct LogDensityVisitor {
  double x;

  double operator()(const GammaPrior& g) const {
    if (!(x > 0.0)) return kNegInf;
    return g.shape * std::log(g.rate) - std::lgamma(g.shape) + (g.shape - 1.0) * std::log(x) -
           g.rate * x;
  }
  double operator()(const NormalPrior& n) const {
    const double z = (x - n.mean) / n.sd;
    return -0.5 * kLogTwoPi - std::log(n.sd) - 0.5 * z * z;
  }
  double operator()(const UniformPrior& u) const {
    if (x < u.lower || x > u.upper) return kNegInf;
    return -std::log(u.upper - u.lower);
  }
};

}  // namespace

double log_density(const PriorComponent& component, double x) {
  if (std::isnan(x)) return kNegInf;
  return std::visit(LogDensityVisitor{x}, component);
}

double prior_mean(const PriorComponent& component) {
  return std::visit(
      [](const auto& c) -> double {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, GammaPrior>) return c.shape / c.rate;
        if constexpr (std::is_same_v<T, NormalPrior>) return c.mean;
        if constexpr (std::is_same_v<T, UniformPrior>) return 0.5 * (c.lower + c.upper);
      },
      component);
}

double prior_quantile(const PriorComponent& component, double p) {
  return std::visit(
      [p](const auto& c) -> double {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, GammaPrior>) {
          return boost::math::quantile(boost::math::gamma_distribution<>(c.shape, 1.0 / c.rate), p);
        }
        if constexpr (std::is_same_v<T, NormalPrior>) {
          return boost::math::quantile(boost::math::normal_distribution<>(c.mean, c.sd), p);
        }
        if constexpr (std::is_same_v<T, UniformPrior>) return c.lower + p * (c.upper - c.lower);
      },
      component);
}

std::string describe(const PriorComponent& component) {
  std::ostringstream os;
  std::visit(
      [&os](const auto& c) {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, GammaPrior>) os << "Gamma(shape=" << c.shape << ", rate=" << c.rate << ")";
        if constexpr (std::is_same_v<T, NormalPrior>) os << "Normal(mean=" << c.mean << ", sd=" << c.sd << ")";
        if constexpr (std::is_same_v<T, UniformPrior>) os << "Uniform(" << c.lower << ", " << c.upper << ")";
      },
      component);
  return os.str();
}

double log_prior(const Prior& prior, const ParamVector& phi) {
  if (phi.theta.size() != prior.theta.size()) {
    throw std::invalid_argument("prior and parameter dimensions differ");
  }
  double lp = 0.0;
  for (std::size_t i = 0; i < prior.theta.size(); ++i) {
    lp += log_density(prior.theta[i], phi.theta[i]);
  }
  if (prior.sigma) lp += log_density(*prior.sigma, phi.sigma);
  return lp;
}

// ---------------------------------------------------------------- forward maps

ForwardMap exact_forward(std::function<double(double, std::span<const double>)> oracle,
                         std::vector<double> times) {
  return [oracle = std::move(oracle), times = std::move(times)](std::span<const double> theta) {
    std::vector<double> out;
    out.reserve(times.size());
    for (double t : times) out.push_back(oracle(t, theta));
    return out;
  };
}

ForwardMap solver_forward(OdeSystem system, SolverConfig config, double t0,
                          std::vector<double> times) {
  (void)make_solver_config(config.method, config.h);
  require_aligned(t0, times, config.h);
  return [system = std::move(system), config, t0,
          times = std::move(times)](std::span<const double> theta) {
    return observe_at(system, theta, config, t0, times);
  };
}

// ---------------------------------------------------------------- likelihood / posterior

double log_likelihood(const Dataset& data, const ParamVector& phi, const ForwardMap& forward) {
  if (!(phi.sigma > 0.0)) return kNegInf;
  std::vector<double> pred;
  try {
    pred = forward(phi.theta);
  } catch (const NonFiniteState&) {
    return kNegInf;
  }
  if (pred.size() != data.size()) {
    throw std::invalid_argument("forward map returned the wrong number of predictions");
  }
  double ss = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double r = data.values[i] - pred[i];
    ss += r * r;
  }
  if (!std::isfinite(ss)) return kNegInf;
  const double n = static_cast<double>(data.size());
  return -n * std::log(phi.sigma) - 0.5 * n * kLogTwoPi - 0.5 * ss / (phi.sigma * phi.sigma);
}

double log_posterior_unnorm(const Dataset& data, const Prior& prior, const ParamVector& phi,
                            const ForwardMap& forward) {
  const double lp = log_prior(prior, phi);
  if (lp == kNegInf) return kNegInf;
  return log_likelihood(data, phi, forward) + lp;
}

double likelihood_ratio_Rh(const Dataset& data, const ParamVector& phi,
                           const ForwardMap& numerical, const ForwardMap& exact) {
  return std::exp(log_likelihood(data, phi, numerical) - log_likelihood(data, phi, exact));
}

double max_observation_discrepancy(std::span<const double> theta, const ForwardMap& numerical,
                                   const ForwardMap& exact) {
  const auto a = numerical(theta);
  const auto b = exact(theta);
  if (a.size() != b.size()) throw std::invalid_argument("forward maps disagree in length");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

Posterior::Posterior(Dataset data, Prior prior, ForwardMap forward)
    : data_(std::move(data)), prior_(std::move(prior)), forward_(std::move(forward)) {
  data_.validate();
  if (!prior_.infers_sigma() && !data_.sigma_fixed) {
    throw std::invalid_argument("sigma must be either fixed by the dataset or given a prior");
  }
}

std::size_t Posterior::dim() const noexcept {
  return prior_.theta.size() + (prior_.infers_sigma() ? 1 : 0);
}

ParamVector Posterior::unpack(std::span<const double> flat) const {
  if (flat.size() != dim()) throw std::invalid_argument("parameter vector has wrong length");
  ParamVector phi;
  const std::size_t d = prior_.theta.size();
  phi.theta.assign(flat.begin(), flat.begin() + static_cast<std::ptrdiff_t>(d));
  phi.sigma = prior_.infers_sigma() ? flat[d] : *data_.sigma_fixed;
  return phi;
}

std::vector<double> Posterior::pack(const ParamVector& phi) const {
  std::vector<double> flat = phi.theta;
  if (prior_.infers_sigma()) flat.push_back(phi.sigma);
  return flat;
}

double Posterior::log_likelihood(std::span<const double> flat) const {
  return odebf::log_likelihood(data_, unpack(flat), forward_);
}

double Posterior::log_prior(std::span<const double> flat) const {
  return odebf::log_prior(prior_, unpack(flat));
}

double Posterior::log_density(std::span<const double> flat) const {
  return log_posterior_unnorm(data_, prior_, unpack(flat), forward_);
}

}  // namespace odebf
