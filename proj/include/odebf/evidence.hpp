/**
 * @file evidence.hpp
 * @brief Marginal-likelihood estimation from MCMC output, plus quadrature references.
 *
 * The Monte Carlo estimator recycles the energies U_l saved by the sampler:
 * with A_l = -log alpha(phi_l) for a normalized weighting density alpha,
 *
 *     log P(y) = log L - logsumexp_l(U_l - A_l).
 *
 * alpha is a Gaussian KDE of a posterior subsample, narrowed (bandwidth shrink,
 * centers restricted to the central 90% box) so its tails are thinner than the
 * posterior's. alpha = prior gives the harmonic-mean estimator.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "odebf/bayes_core.hpp"
#include "odebf/mcmc.hpp"

namespace odebf {

enum class EvidenceMethod { GelfandDeyKDE, HarmonicMean, Quadrature };

std::string_view to_string(EvidenceMethod method) noexcept;
EvidenceMethod parse_evidence_method(std::string_view name);

struct EvidenceEstimate {
  double log_marginal = 0.0;
  double mc_standard_error = 0.0;  ///< on the log scale
  std::size_t n_used = 0;
  EvidenceMethod method = EvidenceMethod::GelfandDeyKDE;
  std::vector<std::string> warnings;
};

// ---------------------------------------------------------------- KDE weighting density

struct KdeOptions {
  std::size_t subsample = 500;
  double shrink = 0.5;          ///< multiplies the Silverman bandwidth; <= 1
  double trim_quantile = 0.05;  ///< centers restricted to [q, 1-q] per coordinate; 0 disables
  std::uint64_t seed = 1;
};

/// Equal-weight mixture of N(center, H) kernels.
class KdeDensity {
 public:
  KdeDensity(std::vector<double> centers, std::size_t dim, const Eigen::MatrixXd& bandwidth);

  double log_density(std::span<const double> x) const;

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return centers_.size() / dim_; }
  const Eigen::MatrixXd& bandwidth() const noexcept { return bandwidth_; }
  std::span<const double> center(std::size_t k) const { return {centers_.data() + k * dim_, dim_}; }

  std::vector<std::string> warnings;

 private:
  std::vector<double> centers_;
  std::size_t dim_;
  Eigen::MatrixXd bandwidth_;
  Eigen::MatrixXd chol_lower_;
  double log_norm_;
};

/**
 * @brief Fits a Gaussian KDE to a (row-major) sample.
 *
 * Bandwidth matrix H = (shrink * c)^2 * Cov with the multivariate Silverman
 * factor c = (4 / ((d + 2) m))^{1 / (d + 4)}. A singular covariance is
 * jittered by 1e-10 I and flagged with a "DegenerateSample" warning.
 * Requires at least 30 centers after trimming and subsampling.
 */
KdeDensity kde_fit(std::span<const double> draws, std::size_t dim, const KdeOptions& options = {});
KdeDensity kde_fit(const Chain& chain, const KdeOptions& options = {});

// ---------------------------------------------------------------- Monte Carlo estimators

using LogWeightFn = std::function<double(std::span<const double>)>;

/**
 * @brief Reciprocal importance estimator with an arbitrary normalized log weighting density.
 *
 * Standard error: batch means on exp(U - A), delta-method to the log scale.
 * Adds an "InfiniteVarianceWarning" when the largest 1% of terms carry over
 * half of the total weight. The per-draw weight evaluation fans out over
 * `jobs` threads and is reduced in a fixed order.
 */
EvidenceEstimate gelfand_dey(std::span<const double> energies, std::span<const double> draws,
                             std::size_t dim, const LogWeightFn& log_alpha,
                             EvidenceMethod label = EvidenceMethod::GelfandDeyKDE,
                             unsigned jobs = 1);
EvidenceEstimate gelfand_dey(const Chain& chain, const KdeDensity& alpha, unsigned jobs = 1);

/**
 * @brief Cross-fitted KDE estimator: a KDE fitted on each half of the chain
 * weights the terms of the other half, so no draw is scored by a kernel
 * centered on itself or its rejected-move copies.
 */
EvidenceEstimate gelfand_dey_kde(const Chain& chain, const KdeOptions& options = {}, unsigned jobs = 1);

/// gelfand_dey with alpha = prior.
EvidenceEstimate harmonic_mean(const Chain& chain, const LogWeightFn& log_prior);

/// Same estimator from precomputed terms U_l - A_l.
EvidenceEstimate gelfand_dey_from_terms(std::span<const double> terms, EvidenceMethod label);

// ---------------------------------------------------------------- quadrature

struct GridSpec {
  std::vector<std::pair<double, double>> bounds;  ///< one interval per dimension (d <= 2)
  std::size_t initial_intervals = 64;
  double rel_tol = 1e-6;
  std::size_t max_levels = 12;
  double boundary_ratio = 1e-12;  ///< max integrand on the boundary relative to the peak
};

/**
 * @brief Trapezoid rule with successive halving of the spacing, in log space.
 *
 * Stops when two successive levels agree to rel_tol. Throws BoundsTooTight when
 * the integrand on the boundary exceeds boundary_ratio times its peak.
 */
EvidenceEstimate quadrature_marginal(const LogDensityFn& log_integrand, const GridSpec& grid);
EvidenceEstimate quadrature_marginal(const Posterior& posterior, const GridSpec& grid);

struct ModeBracket {
  double mode = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double sd = 0.0;  ///< Laplace approximation at the mode
};

/**
 * @brief Locates the mode of a unimodal 1D log density inside [lo, hi] and a
 * bracket whose end points sit at least `log_drop` below the peak.
 */
ModeBracket bracket_mode_1d(const LogDensityFn& log_density, double lo, double hi,
                            std::size_t scan_points = 4000, double log_drop = 32.0);

/// Bracket the posterior of a one-parameter model, scanning between prior quantiles.
ModeBracket bracket_posterior_1d(const Posterior& posterior);

/// Grid over the posterior bracket of a 1D posterior.
GridSpec auto_grid_1d(const Posterior& posterior, double rel_tol = 1e-10);

// ---------------------------------------------------------------- JSON records

std::string evidence_to_json(const EvidenceEstimate& estimate, double h, std::string_view solver);

struct EvidenceRecord {
  EvidenceEstimate estimate;
  double h = 0.0;
  std::string solver;
};

EvidenceRecord evidence_from_json(std::string_view text);

}  // namespace odebf
