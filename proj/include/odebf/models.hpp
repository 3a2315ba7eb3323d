/**
 * @file models.hpp
 * @brief Concrete forward models: logistic growth and the glucose-insulin minimal model.
 */
#pragma once

#include <span>

#include "odebf/ode_core.hpp"

namespace odebf {

/**
 * @brief Logistic growth in growth-rate form, dX/dt = lambda X (1 - X/K).
 *
 * lambda is the per-unit-time growth rate; K the carrying capacity.
 */
struct LogisticParams {
  double lambda = 1.0;
  double K = 1000.0;
  double X0 = 100.0;
};

/// Throws std::invalid_argument unless every field is strictly positive.
void validate(const LogisticParams& params);

double logistic_rhs(double x, double t, const LogisticParams& params);

/// Closed form K X0 / (X0 + (K - X0) e^{-lambda t}); no overflow for large lambda t.
double logistic_exact(double t, const LogisticParams& params);

/// Scalar logistic system with theta = (lambda); K and X0 fixed.
OdeSystem make_logistic_system(double K = 1000.0, double X0 = 100.0);

/// Glucose (G), insulin (I), glucagon (L) and digestive glucose (D) minimal model.
struct GlucoseParams {
  double theta0 = 10.0;  ///< insulin production gain (the inferred parameter)
  double theta1 = 26.6;  ///< glucagon gain
  double theta2 = 0.2;   ///< digestive mean life, hours
  double a = 1.0;        ///< insulin decay scale
  double b = 2.0;        ///< glucagon decay scale
  double Gb = 80.0;      ///< glucose baseline, mg/dL
};

void validate(const GlucoseParams& params);

/// State order (G, I, L, D). Positive parts are exact clamps max(u, 0).
StateVector glucose_rhs(std::span<const double> x, double t, const GlucoseParams& params);

/// Default digestive glucose load D(0), in the units of G.
inline constexpr double kDefaultGlucoseLoad = 200.0;

/**
 * @brief Glucose system with theta = (theta0); other constants from `fixed`.
 *
 * Initial state (d0, 0, 0, load). `fixed.theta0` is ignored.
 */
OdeSystem make_glucose_system(const GlucoseParams& fixed, double d0,
                              double load = kDefaultGlucoseLoad);

/// f(X): identity for the logistic model, glucose component for the minimal model.
double observation_f(const OdeSystem& system, std::span<const double> x);

}  // namespace odebf
