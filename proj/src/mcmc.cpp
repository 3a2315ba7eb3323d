#include "odebf/mcmc.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "odebf/errors.hpp"
#include "odebf/logmath.hpp"

namespace odebf {

void ProposalConfig::validate(std::size_t dim) const {
  if (step_scales.size() != dim) {
    throw std::invalid_argument("proposal scales must match the parameter dimension");
  }
  for (double s : step_scales) {
    if (!(s > 0.0) || !std::isfinite(s)) throw std::invalid_argument("proposal scales must be positive");
  }
  if (!(target_accept > 0.0 && target_accept < 1.0)) {
    throw std::invalid_argument("target acceptance must lie in (0, 1)");
  }
  if (adapt_window == 0) throw std::invalid_argument("adapt_window must be positive");
}

std::vector<double> Chain::coordinate(std::size_t j) const {
  std::vector<double> out(size());
  for (std::size_t l = 0; l < size(); ++l) out[l] = at(l, j);
  return out;
}

std::size_t default_burn_in(std::size_t n_iter) noexcept { return n_iter / 5; }

Chain mh_run(const LogDensityFn& posterior, std::span<const double> init,
             const ProposalConfig& proposal, std::size_t n_iter, std::size_t burn_in,
             std::uint64_t seed) {
  const std::size_t dim = init.size();
  if (dim == 0) throw std::invalid_argument("mh_run: empty initial point");
  proposal.validate(dim);
  if (!(n_iter > burn_in)) throw std::invalid_argument("mh_run: n_iter must exceed burn_in");

  std::vector<double> current(init.begin(), init.end());
  double current_lp = posterior(current);
  if (!(current_lp > kNegInf) || std::isnan(current_lp)) {
    throw InitializationError("posterior density is zero at the initial point");
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  Chain chain;
  chain.dim = dim;
  chain.seed = seed;
  const std::size_t kept = n_iter - burn_in;
  chain.draws.reserve(kept * dim);
  chain.energies.reserve(kept);

  double log_factor = 0.0;
  std::vector<double> scales = proposal.step_scales;
  std::vector<double> candidate(dim);
  std::size_t accepted_after_burn = 0;

  const auto start = std::chrono::steady_clock::now();
  for (std::size_t it = 0; it < n_iter; ++it) {
    const double factor = std::exp(log_factor);
    for (std::size_t j = 0; j < dim; ++j) {
      candidate[j] = current[j] + factor * scales[j] * normal(rng);
    }
    const double candidate_lp = posterior(candidate);
    const double log_u = std::log(uniform(rng));
    const bool accept = candidate_lp > kNegInf && log_u < candidate_lp - current_lp;
    if (accept) {
      current.swap(candidate);
      current_lp = candidate_lp;
    }

    if (it < burn_in) {
      if (proposal.adapt) {
        const double gain =
            std::pow(1.0 + static_cast<double>(it) / static_cast<double>(proposal.adapt_window), -0.6);
        log_factor += gain * ((accept ? 1.0 : 0.0) - proposal.target_accept);
      }
    } else {
      if (accept) ++accepted_after_burn;
      chain.draws.insert(chain.draws.end(), current.begin(), current.end());
      chain.energies.push_back(-current_lp);
    }
  }
  chain.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  chain.accept_rate = static_cast<double>(accepted_after_burn) / static_cast<double>(kept);
  chain.final_scales.resize(dim);
  for (std::size_t j = 0; j < dim; ++j) chain.final_scales[j] = std::exp(log_factor) * scales[j];
  if (chain.accept_rate < 0.01) {
    chain.warnings.emplace_back("StuckChain: acceptance rate below 0.01");
  }
  return chain;
}

double effective_sample_size(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 100) throw std::invalid_argument("effective_sample_size needs at least 100 draws");
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  double c0 = 0.0;
  for (double v : x) c0 += (v - mean) * (v - mean);
  c0 /= static_cast<double>(n);
  if (!(c0 > 0.0)) return 1.0;

  auto rho = [&](std::size_t lag) {
    double s = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) s += (x[i] - mean) * (x[i + lag] - mean);
    return s / static_cast<double>(n) / c0;
  };

  // Geyer's initial positive sequence, made monotone.
  double tau = -1.0;
  double prev_pair = std::numeric_limits<double>::infinity();
  for (std::size_t m = 0; 2 * m + 1 < n; ++m) {
    double pair = rho(2 * m) + rho(2 * m + 1);
    if (pair <= 0.0) break;
    pair = std::min(pair, prev_pair);
    tau += 2.0 * pair;
    prev_pair = pair;
  }
  const double ess = static_cast<double>(n) / std::max(tau, 1e-12);
  return std::min(ess, static_cast<double>(n));
}

double effective_sample_size(const Chain& chain, std::size_t coordinate) {
  const auto series = chain.coordinate(coordinate);
  return effective_sample_size(series);
}

void write_chain_csv(std::ostream& os, const Chain& chain) {
  os << "index";
  for (std::size_t j = 0; j < chain.dim; ++j) os << ",theta" << j;
  os << ",U\n";
  os << std::setprecision(17);
  for (std::size_t l = 0; l < chain.size(); ++l) {
    os << l;
    for (std::size_t j = 0; j < chain.dim; ++j) os << ',' << chain.at(l, j);
    os << ',' << chain.energies[l] << '\n';
  }
}

void write_chain_csv(const std::string& path, const Chain& chain) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  write_chain_csv(os, chain);
}

Chain read_chain_csv(std::istream& is) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(is, line)) throw ParseError("empty chain file", line_no);
  std::size_t columns = 1;
  for (char c : line) columns += (c == ',');
  if (columns < 3 || line.rfind("index", 0) != 0) {
    throw ParseError("chain header must be index,theta0,...,U", line_no);
  }
  Chain chain;
  chain.dim = columns - 2;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw ParseError("non-numeric cell '" + cell + "'", line_no);
      }
    }
    if (row.size() != columns) throw ParseError("wrong number of columns", line_no);
    chain.draws.insert(chain.draws.end(), row.begin() + 1, row.end() - 1);
    chain.energies.push_back(row.back());
  }
  return chain;
}

Chain read_chain_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  return read_chain_csv(is);
}

}  // namespace odebf
