#include "odebf/ode_core.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "odebf/errors.hpp"

namespace odebf {

namespace {

constexpr double kGridRelTol = 1e-9;
constexpr double kRoundoffFloor = 1e-13;

bool all_finite(std::span<const double> x) {
  return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace

int order_of(Method method) noexcept {
  switch (method) {
    case Method::Euler:
      return 1;
    case Method::RK2:
      return 2;
    case Method::RK4:
      return 4;
  }
  return 0;
}

std::string_view to_string(Method method) noexcept {
  switch (method) {
    case Method::Euler:
      return "euler";
    case Method::RK2:
      return "rk2";
    case Method::RK4:
      return "rk4";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "euler" || lower == "rk1") return Method::Euler;
  if (lower == "rk2" || lower == "midpoint") return Method::RK2;
  if (lower == "rk4") return Method::RK4;
  throw std::invalid_argument("unknown solver method: " + std::string(name));
}

SolverConfig make_solver_config(Method method, double h) {
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw std::invalid_argument("solver step size must be positive and finite");
  }
  return SolverConfig{method, h};
}

Stepper::Stepper(Method method, std::size_t dim)
    : method_(method), k1_(dim), k2_(dim), k3_(dim), k4_(dim), tmp_(dim) {}

void Stepper::advance(std::span<double> x, double t, double h, const RhsFn& rhs,
                      std::span<const double> theta) {
  const std::size_t n = x.size();
  switch (method_) {
    case Method::Euler:
      rhs(x, t, theta, k1_);
      for (std::size_t i = 0; i < n; ++i) x[i] += h * k1_[i];
      return;
    case Method::RK2:
      rhs(x, t, theta, k1_);
      for (std::size_t i = 0; i < n; ++i) tmp_[i] = x[i] + 0.5 * h * k1_[i];
      rhs(tmp_, t + 0.5 * h, theta, k2_);
      for (std::size_t i = 0; i < n; ++i) x[i] += h * k2_[i];
      return;
    case Method::RK4:
      rhs(x, t, theta, k1_);
      for (std::size_t i = 0; i < n; ++i) tmp_[i] = x[i] + 0.5 * h * k1_[i];
      rhs(tmp_, t + 0.5 * h, theta, k2_);
      for (std::size_t i = 0; i < n; ++i) tmp_[i] = x[i] + 0.5 * h * k2_[i];
      rhs(tmp_, t + 0.5 * h, theta, k3_);
      for (std::size_t i = 0; i < n; ++i) tmp_[i] = x[i] + h * k3_[i];
      rhs(tmp_, t + h, theta, k4_);
      for (std::size_t i = 0; i < n; ++i) {
        x[i] += (h / 6.0) * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
      }
      return;
  }
}

StateVector step(Method method, std::span<const double> x, double t, double h,
                 const RhsFn& rhs, std::span<const double> theta) {
  StateVector out(x.begin(), x.end());
  Stepper stepper(method, out.size());
  stepper.advance(out, t, h, rhs, theta);
  if (!all_finite(out)) {
    throw NonFiniteState(t, std::vector<double>(theta.begin(), theta.end()), 0);
  }
  return out;
}

StateVector step_euler(std::span<const double> x, double t, double h, const RhsFn& rhs,
                       std::span<const double> theta) {
  return step(Method::Euler, x, t, h, rhs, theta);
}

StateVector step_rk2(std::span<const double> x, double t, double h, const RhsFn& rhs,
                     std::span<const double> theta) {
  return step(Method::RK2, x, t, h, rhs, theta);
}

StateVector step_rk4(std::span<const double> x, double t, double h, const RhsFn& rhs,
                     std::span<const double> theta) {
  return step(Method::RK4, x, t, h, rhs, theta);
}

std::size_t grid_index(double t0, double t, double h) {
  const double q = (t - t0) / h;
  const double r = std::round(q);
  if (q < -kGridRelTol || std::abs(q - r) > kGridRelTol * std::max(1.0, std::abs(q))) {
    throw GridMismatch("time " + std::to_string(t) + " is not a node of the grid t0 = " +
                       std::to_string(t0) + ", h = " + std::to_string(h));
  }
  return static_cast<std::size_t>(r);
}

void require_aligned(double t0, std::span<const double> times, double h) {
  for (double t : times) {
    (void)grid_index(t0, t, h);
  }
}

namespace {

// Marches from t0 and calls `record(node_index, state)` at every requested node.
template <class Record>
void march(const OdeSystem& system, std::span<const double> theta, const SolverConfig& config,
           double t0, std::span<const std::size_t> nodes, Record&& record) {
  if (!(config.h > 0.0)) throw std::invalid_argument("solver step size must be positive");
  StateVector x = system.initial_state(theta);
  if (x.size() != system.dim_p) {
    throw std::invalid_argument("initial state length does not match system dimension");
  }
  Stepper stepper(config.method, x.size());
  std::size_t n = 0;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const std::size_t target = nodes[k];
    while (n < target) {
      // Node times are computed multiplicatively so no rounding drift accumulates.
      const double t = t0 + static_cast<double>(n) * config.h;
      stepper.advance(x, t, config.h, system.rhs, theta);
      ++n;
      if (!all_finite(x)) {
        throw NonFiniteState(t0 + static_cast<double>(n) * config.h,
                             std::vector<double>(theta.begin(), theta.end()), n);
      }
    }
    record(k, x);
  }
}

}  // namespace

Trajectory integrate(const OdeSystem& system, std::span<const double> theta,
                     const SolverConfig& config, double t0, double t_end) {
  const std::size_t steps = grid_index(t0, t_end, config.h);
  std::vector<std::size_t> nodes(steps + 1);
  std::iota(nodes.begin(), nodes.end(), std::size_t{0});
  Trajectory traj;
  traj.grid.reserve(nodes.size());
  traj.states.reserve(nodes.size());
  march(system, theta, config, t0, nodes, [&](std::size_t k, const StateVector& x) {
    traj.grid.push_back(t0 + static_cast<double>(k) * config.h);
    traj.states.push_back(x);
  });
  return traj;
}

std::vector<StateVector> solve_at(const OdeSystem& system, std::span<const double> theta,
                                  const SolverConfig& config, double t0,
                                  std::span<const double> times) {
  std::vector<std::size_t> nodes;
  nodes.reserve(times.size());
  for (double t : times) {
    const std::size_t idx = grid_index(t0, t, config.h);
    if (!nodes.empty() && idx <= nodes.back()) {
      throw NonMonotoneTimes("requested solver times must be strictly increasing");
    }
    nodes.push_back(idx);
  }
  std::vector<StateVector> out;
  out.reserve(times.size());
  march(system, theta, config, t0, nodes,
        [&](std::size_t, const StateVector& x) { out.push_back(x); });
  return out;
}

std::vector<double> observe_at(const OdeSystem& system, std::span<const double> theta,
                               const SolverConfig& config, double t0,
                               std::span<const double> times) {
  std::vector<double> out;
  out.reserve(times.size());
  std::vector<std::size_t> nodes;
  nodes.reserve(times.size());
  for (double t : times) {
    const std::size_t idx = grid_index(t0, t, config.h);
    if (!nodes.empty() && idx <= nodes.back()) {
      throw NonMonotoneTimes("requested solver times must be strictly increasing");
    }
    nodes.push_back(idx);
  }
  march(system, theta, config, t0, nodes,
        [&](std::size_t, const StateVector& x) { out.push_back(system.observe(x)); });
  return out;
}

double euclidean_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("vector length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

double least_squares_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("least_squares_slope needs two or more paired values");
  }
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) throw std::invalid_argument("least_squares_slope: constant regressor");
  return sxy / sxx;
}

double estimate_order(const OdeSystem& system, std::span<const double> theta, Method method,
                      std::span<const double> h_list, double t0, double t_check,
                      const ExactSolutionFn& oracle) {
  if (h_list.size() < 3) throw std::invalid_argument("estimate_order needs at least 3 step sizes");
  const StateVector exact = oracle(t_check);
  const double check[] = {t_check};
  std::vector<double> log_h, log_err;
  for (double h : h_list) {
    const auto states = solve_at(system, theta, make_solver_config(method, h), t0, check);
    const double err = euclidean_distance(states.front(), exact);
    if (err >= kRoundoffFloor) {
      log_h.push_back(std::log(h));
      log_err.push_back(std::log(err));
    }
  }
  if (log_h.size() < 2) {
    throw DegenerateFit("global errors are at machine precision; order is unidentifiable");
  }
  return least_squares_slope(log_h, log_err);
}

}  // namespace odebf
