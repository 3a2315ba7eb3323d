#include "odebf/evidence.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "odebf/errors.hpp"
#include "odebf/logmath.hpp"

namespace odebf {

std::string_view to_string(EvidenceMethod method) noexcept {
  switch (method) {
    case EvidenceMethod::GelfandDeyKDE:
      return "gelfand_dey_kde";
    case EvidenceMethod::HarmonicMean:
      return "harmonic_mean";
    case EvidenceMethod::Quadrature:
      return "quadrature";
  }
  return "unknown";
}

EvidenceMethod parse_evidence_method(std::string_view name) {
  if (name == "gelfand_dey_kde") return EvidenceMethod::GelfandDeyKDE;
  if (name == "harmonic_mean") return EvidenceMethod::HarmonicMean;
  if (name == "quadrature") return EvidenceMethod::Quadrature;
  throw std::invalid_argument("unknown evidence method: " + std::string(name));
}

// ---------------------------------------------------------------- KDE

KdeDensity::KdeDensity(std::vector<double> centers, std::size_t dim,
                       const Eigen::MatrixXd& bandwidth)
    : centers_(std::move(centers)), dim_(dim), bandwidth_(bandwidth) {
  if (dim_ == 0 || centers_.empty() || centers_.size() % dim_ != 0) {
    throw std::invalid_argument("KDE centers must be a non-empty multiple of the dimension");
  }
  if (bandwidth_.rows() != static_cast<Eigen::Index>(dim_) ||
      bandwidth_.cols() != static_cast<Eigen::Index>(dim_)) {
    throw std::invalid_argument("KDE bandwidth matrix has the wrong shape");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(bandwidth_);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("KDE bandwidth matrix is not positive definite");
  }
  chol_lower_ = llt.matrixL();
  double log_det_l = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) log_det_l += std::log(chol_lower_(i, i));
  log_norm_ = -0.5 * static_cast<double>(dim_) * kLogTwoPi - log_det_l -
              std::log(static_cast<double>(size()));
}

double KdeDensity::log_density(std::span<const double> x) const {
  if (x.size() != dim_) throw std::invalid_argument("KDE evaluated at a point of wrong dimension");
  double m = kNegInf;
  double s = 0.0;
  auto accumulate = [&](double v) {
    if (v > m) {
      s = s * std::exp(m - v) + 1.0;
      m = v;
    } else {
      s += std::exp(v - m);
    }
  };
  const std::size_t n = size();
  if (dim_ == 1) {
    const double inv = 1.0 / chol_lower_(0, 0);
    for (std::size_t k = 0; k < n; ++k) {
      const double z = (x[0] - centers_[k]) * inv;
      accumulate(-0.5 * z * z);
    }
  } else {
    std::vector<double> z(dim_);
    for (std::size_t k = 0; k < n; ++k) {
      const double* c = centers_.data() + k * dim_;
      double q = 0.0;
      // forward substitution L z = x - c
      for (std::size_t i = 0; i < dim_; ++i) {
        double r = x[i] - c[i];
        for (std::size_t j = 0; j < i; ++j) r -= chol_lower_(i, j) * z[j];
        z[i] = r / chol_lower_(i, i);
        q += z[i] * z[i];
      }
      accumulate(-0.5 * q);
    }
  }
  return m + std::log(s) + log_norm_;
}

namespace {

double empirical_quantile(std::vector<double> v, double p) {
  const double pos = p * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(lo), v.end());
  const double a = v[lo];
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(hi), v.end());
  const double b = v[hi];
  return a + (pos - static_cast<double>(lo)) * (b - a);
}

}  // namespace

KdeDensity kde_fit(std::span<const double> draws, std::size_t dim, const KdeOptions& options) {
  if (dim == 0 || draws.size() % dim != 0) {
    throw std::invalid_argument("kde_fit: draws must be row-major with a positive dimension");
  }
  if (!(options.shrink > 0.0) || options.shrink > 1.0) {
    throw std::invalid_argument("kde_fit: shrink factor must lie in (0, 1]");
  }
  if (options.trim_quantile < 0.0 || options.trim_quantile >= 0.5) {
    throw std::invalid_argument("kde_fit: trim quantile must lie in [0, 0.5)");
  }
  const std::size_t n = draws.size() / dim;

  // Eligible centers: inside the per-coordinate central box.
  std::vector<std::size_t> eligible;
  if (options.trim_quantile > 0.0) {
    std::vector<double> lo(dim), hi(dim);
    std::vector<double> column(n);
    for (std::size_t j = 0; j < dim; ++j) {
      for (std::size_t l = 0; l < n; ++l) column[l] = draws[l * dim + j];
      lo[j] = empirical_quantile(column, options.trim_quantile);
      hi[j] = empirical_quantile(column, 1.0 - options.trim_quantile);
    }
    for (std::size_t l = 0; l < n; ++l) {
      bool inside = true;
      for (std::size_t j = 0; j < dim && inside; ++j) {
        const double v = draws[l * dim + j];
        inside = v >= lo[j] && v <= hi[j];
      }
      if (inside) eligible.push_back(l);
    }
  } else {
    eligible.resize(n);
    std::iota(eligible.begin(), eligible.end(), std::size_t{0});
  }

  const std::size_t m = std::min(options.subsample, eligible.size());
  if (m < 30) throw std::invalid_argument("kde_fit: need at least 30 centers");
  std::vector<std::size_t> chosen;
  chosen.reserve(m);
  std::mt19937_64 rng(options.seed);
  std::sample(eligible.begin(), eligible.end(), std::back_inserter(chosen), m, rng);

  std::vector<double> centers;
  centers.reserve(m * dim);
  for (std::size_t l : chosen) {
    centers.insert(centers.end(), draws.begin() + static_cast<std::ptrdiff_t>(l * dim),
                   draws.begin() + static_cast<std::ptrdiff_t>((l + 1) * dim));
  }

  // Covariance of the full sample.
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> X(
      draws.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  const Eigen::RowVectorXd mean = X.colwise().mean();
  const Eigen::MatrixXd centered = X.rowwise() - mean;
  Eigen::MatrixXd cov = (centered.adjoint() * centered) / std::max<double>(1.0, static_cast<double>(n) - 1.0);

  const double d = static_cast<double>(dim);
  const double silverman = std::pow(4.0 / ((d + 2.0) * static_cast<double>(m)), 1.0 / (d + 4.0));
  Eigen::MatrixXd bandwidth = std::pow(options.shrink * silverman, 2) * cov;

  std::vector<std::string> warnings;
  Eigen::LLT<Eigen::MatrixXd> llt(bandwidth);
  const double scale = bandwidth.diagonal().cwiseAbs().maxCoeff();
  if (llt.info() != Eigen::Success || !(bandwidth.diagonal().minCoeff() > 1e-14 * std::max(scale, 1e-300))) {
    bandwidth += 1e-10 * Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    warnings.emplace_back("DegenerateSample: singular sample covariance, jitter 1e-10 I added");
  }
  KdeDensity kde(std::move(centers), dim, bandwidth);
  kde.warnings = std::move(warnings);
  return kde;
}

KdeDensity kde_fit(const Chain& chain, const KdeOptions& options) {
  return kde_fit(chain.draws, chain.dim, options);
}

// ---------------------------------------------------------------- Gelfand-Dey

EvidenceEstimate gelfand_dey_from_terms(std::span<const double> terms, EvidenceMethod label) {
  const std::size_t L = terms.size();
  if (L < 4) throw std::invalid_argument("gelfand_dey needs at least 4 draws");
  for (double z : terms) {
    if (std::isnan(z) || z == std::numeric_limits<double>::infinity()) {
      throw std::invalid_argument("gelfand_dey: non-finite energy term");
    }
  }
  EvidenceEstimate est;
  est.method = label;
  est.n_used = L;
  const double lse = logsumexp(terms);
  est.log_marginal = -lse + std::log(static_cast<double>(L));

  // Batch means on w = exp(z - max) in fixed order.
  const double zmax = *std::max_element(terms.begin(), terms.end());
  std::vector<double> w(L);
  for (std::size_t l = 0; l < L; ++l) w[l] = std::exp(terms[l] - zmax);
  const double wbar = std::accumulate(w.begin(), w.end(), 0.0) / static_cast<double>(L);
  const auto batch = std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(L))));
  const std::size_t n_batches = L / batch;
  std::vector<double> means(n_batches, 0.0);
  for (std::size_t b = 0; b < n_batches; ++b) {
    for (std::size_t l = b * batch; l < (b + 1) * batch; ++l) means[b] += w[l];
    means[b] /= static_cast<double>(batch);
  }
  const double grand = std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(n_batches);
  double var = 0.0;
  for (double mb : means) var += (mb - grand) * (mb - grand);
  var /= static_cast<double>(n_batches - 1);
  est.mc_standard_error = std::sqrt(var / static_cast<double>(n_batches)) / wbar;

  std::vector<double> sorted = w;
  const std::size_t top = std::max<std::size_t>(1, (L + 99) / 100);
  std::partial_sort(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(top), sorted.end(),
                    std::greater<>());
  const double top_mass = std::accumulate(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(top), 0.0);
  if (top_mass > 0.5 * wbar * static_cast<double>(L)) {
    est.warnings.emplace_back("InfiniteVarianceWarning: top 1% of terms carry over half the weight");
  }
  return est;
}

namespace {

// U_l + log alpha(x_l), evaluated over `jobs` threads in contiguous chunks.
std::vector<double> energy_terms(std::span<const double> energies, std::span<const double> draws, std::size_t dim,
                                 const LogWeightFn& log_alpha, unsigned jobs) {
  const std::size_t L = energies.size();
  if (dim == 0 || draws.size() != L * dim) {
    throw std::invalid_argument("gelfand_dey: draws and energies are not aligned");
  }
  for (double u : energies) {
    if (!std::isfinite(u)) throw std::invalid_argument("gelfand_dey: energies must be finite");
  }
  std::vector<double> terms(L);
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t l = begin; l < end; ++l) terms[l] = energies[l] + log_alpha(draws.subspan(l * dim, dim));
  };
  const unsigned n_jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(L, 1))));
  if (n_jobs == 1) {
    work(0, L);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (L + n_jobs - 1) / n_jobs;
    for (unsigned k = 0; k < n_jobs; ++k) {
      const std::size_t b = k * chunk, e = std::min(L, b + chunk);
      if (b < e) pool.emplace_back(work, b, e);
    }
    for (auto& t : pool) t.join();
  }
  return terms;
}

void append_unique(std::vector<std::string>& out, const std::vector<std::string>& in) {
  for (const auto& w : in) {
    if (std::find(out.begin(), out.end(), w) == out.end()) out.push_back(w);
  }
}

}  // namespace

EvidenceEstimate gelfand_dey(std::span<const double> energies, std::span<const double> draws,
                             std::size_t dim, const LogWeightFn& log_alpha, EvidenceMethod label,
                             unsigned jobs) {
  return gelfand_dey_from_terms(energy_terms(energies, draws, dim, log_alpha, jobs), label);
}

EvidenceEstimate gelfand_dey(const Chain& chain, const KdeDensity& alpha, unsigned jobs) {
  if (alpha.dim() != chain.dim) throw std::invalid_argument("KDE and chain dimensions differ");
  auto est = gelfand_dey(chain.energies, chain.draws, chain.dim,
                         [&alpha](std::span<const double> x) { return alpha.log_density(x); },
                         EvidenceMethod::GelfandDeyKDE, jobs);
  est.warnings.insert(est.warnings.begin(), alpha.warnings.begin(), alpha.warnings.end());
  return est;
}

EvidenceEstimate gelfand_dey_kde(const Chain& chain, const KdeOptions& options, unsigned jobs) {
  const std::size_t L = chain.size(), d = chain.dim;
  const std::size_t half = L / 2;
  const std::span<const double> e(chain.energies), x(chain.draws);
  KdeOptions second = options;
  second.seed = options.seed ^ 0x9e3779b97f4a7c15ULL;
  const auto alpha_first = kde_fit(x.subspan(0, half * d), d, options);
  const auto alpha_second = kde_fit(x.subspan(half * d), d, second);
  auto terms = energy_terms(e.subspan(0, half), x.subspan(0, half * d), d,
                            [&](std::span<const double> p) { return alpha_second.log_density(p); }, jobs);
  const auto tail = energy_terms(e.subspan(half), x.subspan(half * d), d,
                                 [&](std::span<const double> p) { return alpha_first.log_density(p); }, jobs);
  terms.insert(terms.end(), tail.begin(), tail.end());
  auto est = gelfand_dey_from_terms(terms, EvidenceMethod::GelfandDeyKDE);
  std::vector<std::string> warnings;
  append_unique(warnings, alpha_first.warnings);
  append_unique(warnings, alpha_second.warnings);
  append_unique(warnings, est.warnings);
  est.warnings = std::move(warnings);
  return est;
}

EvidenceEstimate harmonic_mean(const Chain& chain, const LogWeightFn& log_prior) {
  return gelfand_dey(chain.energies, chain.draws, chain.dim, log_prior, EvidenceMethod::HarmonicMean);
}

// ---------------------------------------------------------------- quadrature

namespace {

// Trapezoid sum of exp(v - shift) over a uniform 1D grid.
double trapezoid_shifted(std::span<const double> logv, double spacing, double shift) {
  double s = 0.0;
  const std::size_t n = logv.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double w = (i == 0 || i + 1 == n) ? 0.5 : 1.0;
    s += w * std::exp(logv[i] - shift);
  }
  return s * spacing;
}

double max_finite(std::span<const double> v) {
  double m = kNegInf;
  for (double x : v) {
    if (x > m) m = x;
  }
  return m;
}

void check_boundary(double boundary_max, double peak, double ratio) {
  if (boundary_max > kNegInf && boundary_max - peak > std::log(ratio)) {
    throw BoundsTooTight("integrand on the quadrature boundary exceeds the allowed fraction of its peak");
  }
}

EvidenceEstimate quadrature_1d(const LogDensityFn& f, const GridSpec& g) {
  const auto [a, b] = g.bounds[0];
  std::size_t intervals = g.initial_intervals;
  std::vector<double> logv(intervals + 1);
  for (std::size_t i = 0; i <= intervals; ++i) {
    double x[] = {a + (b - a) * static_cast<double>(i) / static_cast<double>(intervals)};
    logv[i] = f(x);
  }
  double peak = max_finite(logv);
  if (!(peak > kNegInf)) throw BoundsTooTight("integrand vanishes on the whole quadrature grid");
  check_boundary(std::max(logv.front(), logv.back()), peak, g.boundary_ratio);

  double previous = trapezoid_shifted(logv, (b - a) / static_cast<double>(intervals), peak);
  EvidenceEstimate est;
  est.method = EvidenceMethod::Quadrature;
  bool converged = false;
  for (std::size_t level = 1; level <= g.max_levels; ++level) {
    const std::size_t next = intervals * 2;
    std::vector<double> refined(next + 1);
    for (std::size_t i = 0; i <= intervals; ++i) refined[2 * i] = logv[i];
    for (std::size_t i = 0; i < intervals; ++i) {
      double x[] = {a + (b - a) * (static_cast<double>(2 * i + 1)) / static_cast<double>(next)};
      refined[2 * i + 1] = f(x);
    }
    logv.swap(refined);
    intervals = next;
    const double new_peak = max_finite(logv);
    if (new_peak > peak) {
      previous *= std::exp(peak - new_peak);
      peak = new_peak;
    }
    const double current = trapezoid_shifted(logv, (b - a) / static_cast<double>(intervals), peak);
    const bool close = std::abs(current - previous) <= g.rel_tol * current;
    previous = current;
    if (close && level >= 2) {
      converged = true;
      break;
    }
  }
  if (!converged) est.warnings.emplace_back("quadrature did not reach the requested tolerance");
  est.log_marginal = peak + std::log(previous);
  est.n_used = logv.size();
  return est;
}

EvidenceEstimate quadrature_2d(const LogDensityFn& f, const GridSpec& g) {
  const auto [a0, b0] = g.bounds[0];
  const auto [a1, b1] = g.bounds[1];
  auto evaluate = [&](std::size_t n, std::vector<double>& logv) {
    logv.assign((n + 1) * (n + 1), kNegInf);
    for (std::size_t i = 0; i <= n; ++i) {
      for (std::size_t j = 0; j <= n; ++j) {
        double x[] = {a0 + (b0 - a0) * static_cast<double>(i) / static_cast<double>(n),
                      a1 + (b1 - a1) * static_cast<double>(j) / static_cast<double>(n)};
        logv[i * (n + 1) + j] = f(x);
      }
    }
  };
  auto integrate = [&](std::size_t n, const std::vector<double>& logv, double shift) {
    double s = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
      const double wi = (i == 0 || i == n) ? 0.5 : 1.0;
      for (std::size_t j = 0; j <= n; ++j) {
        const double wj = (j == 0 || j == n) ? 0.5 : 1.0;
        s += wi * wj * std::exp(logv[i * (n + 1) + j] - shift);
      }
    }
    return s * (b0 - a0) * (b1 - a1) / static_cast<double>(n * n);
  };

  std::size_t n = g.initial_intervals;
  std::vector<double> logv;
  evaluate(n, logv);
  double peak = max_finite(logv);
  if (!(peak > kNegInf)) throw BoundsTooTight("integrand vanishes on the whole quadrature grid");
  double boundary = kNegInf;
  for (std::size_t i = 0; i <= n; ++i) {
    boundary = std::max({boundary, logv[i * (n + 1)], logv[i * (n + 1) + n], logv[i], logv[n * (n + 1) + i]});
  }
  check_boundary(boundary, peak, g.boundary_ratio);

  double previous = integrate(n, logv, peak);
  EvidenceEstimate est;
  est.method = EvidenceMethod::Quadrature;
  bool converged = false;
  for (std::size_t level = 1; level <= g.max_levels; ++level) {
    n *= 2;
    evaluate(n, logv);
    const double new_peak = max_finite(logv);
    if (new_peak > peak) {
      previous *= std::exp(peak - new_peak);
      peak = new_peak;
    }
    const double current = integrate(n, logv, peak);
    const bool close = std::abs(current - previous) <= g.rel_tol * current;
    previous = current;
    if (close && level >= 2) {
      converged = true;
      break;
    }
    if ((n + 1) * (n + 1) > 16'000'000) break;
  }
  if (!converged) est.warnings.emplace_back("quadrature did not reach the requested tolerance");
  est.log_marginal = peak + std::log(previous);
  est.n_used = logv.size();
  return est;
}

}  // namespace

EvidenceEstimate quadrature_marginal(const LogDensityFn& log_integrand, const GridSpec& grid) {
  if (grid.bounds.empty() || grid.bounds.size() > 2) {
    throw std::invalid_argument("quadrature supports one or two dimensions");
  }
  for (const auto& [lo, hi] : grid.bounds) {
    if (!(hi > lo)) throw std::invalid_argument("quadrature bounds must satisfy lower < upper");
  }
  if (grid.initial_intervals < 2) throw std::invalid_argument("quadrature needs at least 2 intervals");
  return grid.bounds.size() == 1 ? quadrature_1d(log_integrand, grid)
                                 : quadrature_2d(log_integrand, grid);
}

EvidenceEstimate quadrature_marginal(const Posterior& posterior, const GridSpec& grid) {
  if (grid.bounds.size() != posterior.dim()) {
    throw std::invalid_argument("grid dimension differs from the posterior dimension");
  }
  return quadrature_marginal(
      [&posterior](std::span<const double> x) { return posterior.log_density(x); }, grid);
}

ModeBracket bracket_mode_1d(const LogDensityFn& f, double lo, double hi, std::size_t scan_points,
                            double log_drop) {
  if (!(hi > lo) || scan_points < 3) throw std::invalid_argument("bracket_mode_1d: bad scan range");
  auto eval = [&f](double x) {
    double p[] = {x};
    const double v = f(p);
    return std::isnan(v) ? kNegInf : v;
  };
  const double dx = (hi - lo) / static_cast<double>(scan_points - 1);
  std::size_t best = 0;
  double best_v = kNegInf;
  for (std::size_t i = 0; i < scan_points; ++i) {
    const double v = eval(lo + dx * static_cast<double>(i));
    if (v > best_v) {
      best_v = v;
      best = i;
    }
  }
  if (!(best_v > kNegInf)) throw std::runtime_error("bracket_mode_1d: density vanishes on the scan");

  // Golden-section refinement inside the neighbouring scan cells.
  double a = lo + dx * (static_cast<double>(best) - 1.0);
  double b = lo + dx * (static_cast<double>(best) + 1.0);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
  double fc = eval(c), fd = eval(d);
  for (int it = 0; it < 200 && (b - a) > 1e-15 * std::max(1.0, std::abs(a)); ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = eval(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = eval(d);
    }
  }
  ModeBracket out;
  out.mode = 0.5 * (a + b);
  double peak = eval(out.mode);
  if (best_v > peak) {
    out.mode = lo + dx * static_cast<double>(best);
    peak = best_v;
  }

  // Laplace s.d. from a second difference, with the probe widened until it resolves curvature.
  double probe = std::max(dx * 1e-3, 1e-9 * std::max(1.0, std::abs(out.mode)));
  double curvature = 0.0;
  for (int it = 0; it < 60; ++it) {
    const double fm = eval(out.mode - probe), fp = eval(out.mode + probe);
    const double drop = peak - 0.5 * (fm + fp);
    if (std::isfinite(drop) && drop > 1e-6) {
      curvature = 2.0 * drop / (probe * probe);
      break;
    }
    probe *= 2.0;
  }
  out.sd = curvature > 0.0 ? 1.0 / std::sqrt(curvature) : dx;

  auto walk = [&](double direction) {
    double step = out.sd;
    double x = out.mode;
    for (int it = 0; it < 200; ++it) {
      x = out.mode + direction * step;
      if (eval(x) < peak - log_drop) return x;
      step *= 1.5;
    }
    return x;
  };
  out.lower = walk(-1.0);
  out.upper = walk(+1.0);
  return out;
}

ModeBracket bracket_posterior_1d(const Posterior& posterior) {
  if (posterior.dim() != 1) throw std::invalid_argument("bracket_posterior_1d needs a 1D posterior");
  const auto& component = posterior.prior().infers_sigma() ? *posterior.prior().sigma
                                                           : posterior.prior().theta.front();
  const double lo = prior_quantile(component, 1e-9);
  const double hi = prior_quantile(component, 1.0 - 1e-9);
  return bracket_mode_1d([&posterior](std::span<const double> x) { return posterior.log_density(x); },
                         lo, hi);
}

GridSpec auto_grid_1d(const Posterior& posterior, double rel_tol) {
  const ModeBracket br = bracket_posterior_1d(posterior);
  GridSpec g;
  g.bounds = {{br.lower, br.upper}};
  g.initial_intervals = 64;
  g.rel_tol = rel_tol;
  g.max_levels = 14;
  return g;
}

// ---------------------------------------------------------------- JSON

std::string evidence_to_json(const EvidenceEstimate& e, double h, std::string_view solver) {
  nlohmann::ordered_json j;
  j["log_marginal"] = e.log_marginal;
  j["se"] = e.mc_standard_error;
  j["method"] = std::string(to_string(e.method));
  j["h"] = h;
  j["solver"] = std::string(solver);
  j["n_used"] = e.n_used;
  j["warnings"] = e.warnings;
  return j.dump(2);
}

EvidenceRecord evidence_from_json(std::string_view text) {
  const auto j = nlohmann::json::parse(text);
  EvidenceRecord r;
  r.estimate.log_marginal = j.at("log_marginal").get<double>();
  r.estimate.mc_standard_error = j.at("se").get<double>();
  r.estimate.method = parse_evidence_method(j.at("method").get<std::string>());
  r.estimate.n_used = j.value("n_used", std::size_t{0});
  r.estimate.warnings = j.value("warnings", std::vector<std::string>{});
  r.h = j.at("h").get<double>();
  r.solver = j.at("solver").get<std::string>();
  return r;
}

}  // namespace odebf
