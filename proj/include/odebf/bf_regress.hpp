/**
 * @file bf_regress.hpp
 * @brief Evidence-versus-step-size regression, Bayes factors and step recommendation.
 *
 * For an order-p solver the numerical marginal behaves as P^h = a + b h^p for
 * small h, so a weighted linear fit against h^p extrapolates the exact-model
 * marginal a. B_y = -b/a is the relative first-order constant.
 */
#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "odebf/bayes_core.hpp"
#include "odebf/evidence.hpp"

namespace odebf {

struct CurvePoint {
  double h = 0.0;
  double log_marginal = 0.0;
  double se = 0.0;  ///< MC standard error on the log scale
  int order = 0;
};

struct EvidenceCurve {
  std::vector<CurvePoint> points;  ///< sorted by decreasing h
  std::vector<bool> used;          ///< regression mask, aligned with points
  int order = 0;

  double log_shift = 0.0;  ///< fit runs on P / exp(log_shift)
  double a_shifted = 0.0;
  double b_shifted = 0.0;
  double a_se_shifted = 0.0;
  double b_se_shifted = 0.0;
  double r_squared = 1.0;

  double log_a() const;  ///< log of the extrapolated exact marginal
  double B_y() const noexcept { return -b_shifted / a_shifted; }
  /// Fitted log P^h.
  double log_predicted(double h) const;
};

/// Default regression mask: the four smallest step sizes (all points if fewer).
std::vector<bool> default_fit_mask(std::span<const CurvePoint> points);

/**
 * @brief Weighted least squares of P^h on h^p, weights 1 / se_lin^2.
 *
 * Uniform weights are used when any selected se is zero. Throws
 * IllConditionedFit with fewer than 3 selected points, a regressor spread
 * h_max^p / h_min^p below 2, or a non-positive intercept.
 */
EvidenceCurve fit_curve(std::vector<CurvePoint> points, int order,
                        std::optional<std::vector<bool>> mask = std::nullopt);

/// exp(log1 - log2); equal model prior odds.
double bayes_factor(double log_marginal_1, double log_marginal_2);
double bayes_factor(const EvidenceEstimate& e1, const EvidenceEstimate& e2);

struct BfRow {
  double h = 0.0;
  double log_marginal = 0.0;
  double se = 0.0;
  double bf = 1.0;  ///< P^h / extrapolated exact marginal
  bool indistinguishable = false;
  double cpu_seconds = 0.0;
};

struct StepRecommendation {
  double h = 0.0;
  double speedup = 1.0;  ///< cpu(h_min) / cpu(h)
};

struct BfReport {
  int order = 0;
  double threshold = 0.99;
  double log_reference = 0.0;  ///< log of the extrapolated exact marginal
  double B_y = 0.0;
  std::vector<BfRow> rows;     ///< sorted by decreasing h
  std::optional<StepRecommendation> recommendation;
  std::vector<std::string> warnings;
};

/// Bayes factors of every curve point against the intercept. cpu_seconds aligned with points.
BfReport make_report(const EvidenceCurve& curve, std::span<const double> cpu_seconds,
                     double threshold = 0.99);

/**
 * @brief Coarsest admissible step.
 *
 * Walks up from the finest h while the Jeffreys flag stays set and returns the
 * last flagged h. Throws NoAdmissibleStep when the finest h is not flagged.
 */
StepRecommendation recommend_step(const BfReport& report);

/// Fills report.recommendation, recording NoAdmissibleStep as a warning instead of throwing.
void attach_recommendation(BfReport& report);

std::string bf_report_to_json(const BfReport& report);
/// Columns h,log_marginal,se,BF,flag,cpu_seconds.
void write_bf_report_csv(std::ostream& os, const BfReport& report);

// ---------------------------------------------------------------- posterior discrepancy

enum class DiscrepancyStatistic { Mean, TotalVariation };

struct DiscrepancyOptions {
  std::size_t points = 4001;             ///< nodes per dimension on the shared grid
  std::size_t coordinate = 0;            ///< coordinate for the mean statistic
  std::optional<GridSpec> grid;          ///< required for d = 2
};

/**
 * @brief Distance between two quadrature-normalized posteriors on a shared grid.
 *
 * Mean: |E_1[phi_j] - E_2[phi_j]|. TotalVariation: (1/2) int |p_1 - p_2|.
 * In one dimension the grid spans the union of both posterior brackets.
 */
double posterior_discrepancy(const Posterior& first, const Posterior& second,
                             DiscrepancyStatistic statistic, const DiscrepancyOptions& options = {});
double posterior_discrepancy(const ForwardMap& forward1, const ForwardMap& forward2,
                             const Dataset& data, const Prior& prior,
                             DiscrepancyStatistic statistic, const DiscrepancyOptions& options = {});

/// Normalized posterior density on a uniform 1D grid, for histograms and plots.
struct GridDensity {
  std::vector<double> x;
  std::vector<double> density;
};
GridDensity posterior_on_grid(const Posterior& posterior, double lower, double upper,
                              std::size_t points);

}  // namespace odebf
