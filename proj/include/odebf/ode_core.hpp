/**
 * @file ode_core.hpp
 * @brief Fixed-step explicit one-step integrators (Euler, RK2, RK4).
 *
 * All solvers march on the uniform grid t_n = t0 + n h. Observation times
 * must be grid nodes; there is no interpolation or dense output.
 */
#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace odebf {

using StateVector = std::vector<double>;

/// Right-hand side F(x, t, theta), written into `dxdt` (length = state dimension).
using RhsFn = std::function<void(std::span<const double> x, double t,
                                 std::span<const double> theta,
                                 std::span<double> dxdt)>;

/// Observation function f: state -> scalar observable.
using ObserveFn = std::function<double(std::span<const double> x)>;

/// Initial state X0, possibly depending on the parameters.
using InitialStateFn = std::function<StateVector(std::span<const double> theta)>;

/** @brief An initial value problem dX/dt = F(X, t, theta), X(t0) = X0, with scalar readout. */
struct OdeSystem {
  std::string name;
  std::size_t dim_p = 0;  ///< state dimension
  std::size_t dim_d = 0;  ///< parameter dimension
  RhsFn rhs;
  ObserveFn observe;
  InitialStateFn initial_state;
};

enum class Method { Euler, RK2, RK4 };

/// Global order of accuracy: Euler 1, RK2 2, RK4 4.
int order_of(Method method) noexcept;
std::string_view to_string(Method method) noexcept;
/// Accepts "euler", "rk2", "rk4" (case-insensitive). Throws std::invalid_argument.
Method parse_method(std::string_view name);

struct SolverConfig {
  Method method = Method::RK4;
  double h = 0.1;

  int order() const noexcept { return order_of(method); }
};

/// Throws std::invalid_argument unless h is positive and finite.
SolverConfig make_solver_config(Method method, double h);

struct Trajectory {
  std::vector<double> grid;
  std::vector<StateVector> states;
};

/**
 * @brief Reusable one-step integrator with preallocated stage buffers.
 *
 * Not thread-safe; give each thread its own instance.
 */
class Stepper {
 public:
  Stepper(Method method, std::size_t dim);

  /// x <- x + h K(t, x, h, F). Does not check finiteness.
  void advance(std::span<double> x, double t, double h, const RhsFn& rhs,
               std::span<const double> theta);

  Method method() const noexcept { return method_; }

 private:
  Method method_;
  std::vector<double> k1_, k2_, k3_, k4_, tmp_;
};

StateVector step_euler(std::span<const double> x, double t, double h, const RhsFn& rhs,
                       std::span<const double> theta);
/// Explicit midpoint rule.
StateVector step_rk2(std::span<const double> x, double t, double h, const RhsFn& rhs,
                     std::span<const double> theta);
/// Classical four-stage Runge-Kutta.
StateVector step_rk4(std::span<const double> x, double t, double h, const RhsFn& rhs,
                     std::span<const double> theta);
StateVector step(Method method, std::span<const double> x, double t, double h,
                 const RhsFn& rhs, std::span<const double> theta);

/// Number of steps n with t0 + n h == t within 1e-9 relative; throws GridMismatch otherwise.
std::size_t grid_index(double t0, double t, double h);

/// Throws GridMismatch unless every time is a node of the grid starting at t0 with step h.
void require_aligned(double t0, std::span<const double> times, double h);

/// Full trajectory on [t0, t_end]. Throws GridMismatch or NonFiniteState.
Trajectory integrate(const OdeSystem& system, std::span<const double> theta,
                     const SolverConfig& config, double t0, double t_end);

/// States at the given ascending grid-aligned times, without storing the trajectory.
std::vector<StateVector> solve_at(const OdeSystem& system, std::span<const double> theta,
                                  const SolverConfig& config, double t0,
                                  std::span<const double> times);

/// f(X^h(t_i)) at each requested time.
std::vector<double> observe_at(const OdeSystem& system, std::span<const double> theta,
                               const SolverConfig& config, double t0,
                               std::span<const double> times);

double euclidean_distance(std::span<const double> a, std::span<const double> b);

/// Exact solution oracle for order estimation.
using ExactSolutionFn = std::function<StateVector(double t)>;

/**
 * @brief Empirical global order: least-squares slope of log error against log h.
 *
 * Errors are measured in the Euclidean norm at `t_check`, integrating from `t0`.
 * Needs at least three step sizes. Errors below 1e-13 are treated as round-off
 * and dropped; DegenerateFit is thrown when fewer than two remain.
 */
double estimate_order(const OdeSystem& system, std::span<const double> theta, Method method,
                      std::span<const double> h_list, double t0, double t_check,
                      const ExactSolutionFn& oracle);

/// Plain least-squares slope of y on x.
double least_squares_slope(std::span<const double> x, std::span<const double> y);

}  // namespace odebf
