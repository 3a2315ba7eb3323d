#include "odebf/models.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace odebf {

void validate(const LogisticParams& params) {
  if (!(params.lambda > 0.0) || !(params.K > 0.0) || !(params.X0 > 0.0)) {
    throw std::invalid_argument("logistic parameters must be strictly positive");
  }
}

double logistic_rhs(double x, double /*t*/, const LogisticParams& params) {
  return params.lambda * x * (1.0 - x / params.K);
}

double logistic_exact(double t, const LogisticParams& params) {
  const double decay = std::exp(-params.lambda * t);
  return params.K * params.X0 / (params.X0 + (params.K - params.X0) * decay);
}

OdeSystem make_logistic_system(double K, double X0) {
  validate(LogisticParams{1.0, K, X0});
  OdeSystem sys;
  sys.name = "logistic";
  sys.dim_p = 1;
  sys.dim_d = 1;
  sys.rhs = [K](std::span<const double> x, double /*t*/, std::span<const double> theta,
                std::span<double> dxdt) { dxdt[0] = theta[0] * x[0] * (1.0 - x[0] / K); };
  sys.observe = [](std::span<const double> x) { return x[0]; };
  sys.initial_state = [X0](std::span<const double>) { return StateVector{X0}; };
  return sys;
}

void validate(const GlucoseParams& p) {
  if (!(p.theta0 > 0.0) || !(p.theta1 > 0.0) || !(p.theta2 > 0.0) || !(p.a > 0.0) ||
      !(p.b > 0.0) || !(p.Gb > 0.0)) {
    throw std::invalid_argument("glucose model parameters must be strictly positive");
  }
}

namespace {

inline void glucose_derivative(std::span<const double> x, double theta0, const GlucoseParams& p,
                               std::span<double> dxdt) {
  const double G = x[0], I = x[1], L = x[2], D = x[3];
  const double ratio = G / p.Gb;
  dxdt[0] = (L - I) * G + D / p.theta2;
  dxdt[1] = theta0 * std::max(ratio - 1.0, 0.0) - I / p.a;
  dxdt[2] = p.theta1 * std::max(1.0 - ratio, 0.0) - L / p.b;
  dxdt[3] = -D / p.theta2;
}

}  // namespace

StateVector glucose_rhs(std::span<const double> x, double /*t*/, const GlucoseParams& params) {
  StateVector out(4);
  glucose_derivative(x, params.theta0, params, out);
  return out;
}

OdeSystem make_glucose_system(const GlucoseParams& fixed, double d0, double load) {
  GlucoseParams p = fixed;
  p.theta0 = 1.0;
  validate(p);
  if (!std::isfinite(d0) || !std::isfinite(load) || load < 0.0) {
    throw std::invalid_argument("glucose initial condition must be finite with a non-negative load");
  }
  OdeSystem sys;
  sys.name = "glucose";
  sys.dim_p = 4;
  sys.dim_d = 1;
  sys.rhs = [p](std::span<const double> x, double /*t*/, std::span<const double> theta,
                std::span<double> dxdt) { glucose_derivative(x, theta[0], p, dxdt); };
  sys.observe = [](std::span<const double> x) { return x[0]; };
  sys.initial_state = [d0, load](std::span<const double>) {
    return StateVector{d0, 0.0, 0.0, load};
  };
  return sys;
}

double observation_f(const OdeSystem& system, std::span<const double> x) {
  return system.observe(x);
}

}  // namespace odebf
