/**
 * @file mcmc.hpp
 * @brief Adaptive random-walk Metropolis-Hastings with recorded energies.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace odebf {

/// Unnormalized log posterior over the flat parameter vector.
using LogDensityFn = std::function<double(std::span<const double>)>;

struct ProposalConfig {
  std::vector<double> step_scales;  ///< per-coordinate Gaussian proposal s.d.
  bool adapt = true;                ///< Robbins-Monro scaling during burn-in only
  std::size_t adapt_window = 100;   ///< controls the gain decay
  double target_accept = 0.30;

  void validate(std::size_t dim) const;
};

/**
 * @brief Post burn-in draws with their energies U = -log(likelihood x prior).
 *
 * Draws are stored row-major: draw l, coordinate j at draws[l * dim + j].
 */
struct Chain {
  std::size_t dim = 0;
  std::vector<double> draws;
  std::vector<double> energies;
  double accept_rate = 0.0;
  double wall_clock_seconds = 0.0;
  std::uint64_t seed = 0;
  std::vector<double> final_scales;
  std::vector<std::string> warnings;

  std::size_t size() const noexcept { return energies.size(); }
  std::span<const double> draw(std::size_t l) const { return {draws.data() + l * dim, dim}; }
  double at(std::size_t l, std::size_t j) const { return draws[l * dim + j]; }
  std::vector<double> coordinate(std::size_t j) const;
};

/// 20% of the total iteration count.
std::size_t default_burn_in(std::size_t n_iter) noexcept;

/**
 * @brief Runs n_iter iterations, discarding the first burn_in.
 *
 * Each iteration costs exactly one posterior evaluation: the current point's
 * log density is cached. Throws InitializationError if posterior(init) is -inf.
 * A "StuckChain" warning is attached when the post burn-in acceptance < 0.01.
 */
Chain mh_run(const LogDensityFn& posterior, std::span<const double> init,
             const ProposalConfig& proposal, std::size_t n_iter, std::size_t burn_in,
             std::uint64_t seed);

/// Initial-positive-sequence ESS of one coordinate. Requires >= 100 draws.
double effective_sample_size(std::span<const double> series);
double effective_sample_size(const Chain& chain, std::size_t coordinate);

/// Columnar text: index,theta0,...,theta{d-1},U with 17 significant digits.
void write_chain_csv(std::ostream& os, const Chain& chain);
void write_chain_csv(const std::string& path, const Chain& chain);
Chain read_chain_csv(std::istream& is);
Chain read_chain_csv(const std::string& path);

}  // namespace odebf
