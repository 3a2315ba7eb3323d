#include "odebf/bf_regress.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

#include "odebf/errors.hpp"
#include "odebf/logmath.hpp"

namespace odebf {

double EvidenceCurve::log_a() const { return log_shift + std::log(a_shifted); }

double EvidenceCurve::log_predicted(double h) const {
  const double v = a_shifted + b_shifted * std::pow(h, order);
  return v > 0.0 ? log_shift + std::log(v) : kNegInf;
}

std::vector<bool> default_fit_mask(std::span<const CurvePoint> points) {
  std::vector<std::size_t> idx(points.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return points[i].h < points[j].h; });
  std::vector<bool> mask(points.size(), false);
  for (std::size_t k = 0; k < std::min<std::size_t>(4, idx.size()); ++k) mask[idx[k]] = true;
  return mask;
}

EvidenceCurve fit_curve(std::vector<CurvePoint> points, int order, std::optional<std::vector<bool>> mask) {
  if (order < 1) throw std::invalid_argument("fit_curve: solver order must be positive");
  if (mask && mask->size() != points.size()) throw std::invalid_argument("fit_curve: mask size mismatch");
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& pt = points[i];
    if (!(pt.h > 0.0) || !std::isfinite(pt.log_marginal) || pt.se < 0.0) {
      throw std::invalid_argument("fit_curve: points need h > 0, finite log marginal and se >= 0");
    }
    if (pt.order != 0 && pt.order != order) throw std::invalid_argument("fit_curve: mixed solver orders");
    for (std::size_t j = 0; j < i; ++j) {
      if (points[j].h == pt.h) throw std::invalid_argument("fit_curve: duplicate step size");
    }
  }

  // Sort by decreasing h, carrying the mask along.
  std::vector<bool> used = mask ? *mask : default_fit_mask(points);
  std::vector<std::size_t> idx(points.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return points[i].h > points[j].h; });
  EvidenceCurve c;
  c.order = order;
  for (std::size_t i : idx) {
    c.points.push_back(points[i]);
    c.points.back().order = order;
    c.used.push_back(used[i]);
  }

  std::vector<double> xs, ys, ws;
  double shift = kNegInf;
  for (std::size_t i = 0; i < c.points.size(); ++i) {
    if (c.used[i]) shift = std::max(shift, c.points[i].log_marginal);
  }
  bool any_zero_se = false;
  for (std::size_t i = 0; i < c.points.size(); ++i) {
    if (!c.used[i]) continue;
    const auto& pt = c.points[i];
    xs.push_back(std::pow(pt.h, order));
    ys.push_back(std::exp(pt.log_marginal - shift));
    ws.push_back(pt.se);
    any_zero_se = any_zero_se || pt.se == 0.0;
  }
  const std::size_t n = xs.size();
  if (n < 3) throw IllConditionedFit("fit_curve needs at least 3 selected points");
  const double xmax = *std::max_element(xs.begin(), xs.end());
  const double xmin = *std::min_element(xs.begin(), xs.end());
  if (xmax / xmin < 2.0) throw IllConditionedFit("regressor spread h_max^p / h_min^p is below 2");
  for (std::size_t i = 0; i < n; ++i) {
    const double se_lin = ws[i] * ys[i];
    ws[i] = any_zero_se ? 1.0 : 1.0 / (se_lin * se_lin);
  }

  double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sw += ws[i];
    sx += ws[i] * xs[i];
    sy += ws[i] * ys[i];
    sxx += ws[i] * xs[i] * xs[i];
    sxy += ws[i] * xs[i] * ys[i];
  }
  const double det = sw * sxx - sx * sx;
  if (!(det > 0.0)) throw IllConditionedFit("singular normal equations");
  c.a_shifted = (sxx * sy - sx * sxy) / det;
  c.b_shifted = (sw * sxy - sx * sy) / det;
  c.log_shift = shift;

  const double ybar = sy / sw;
  double ss_res = 0, ss_tot = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ys[i] - (c.a_shifted + c.b_shifted * xs[i]);
    ss_res += ws[i] * r * r;
    ss_tot += ws[i] * (ys[i] - ybar) * (ys[i] - ybar);
  }
  c.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  double scale = n > 2 ? ss_res / static_cast<double>(n - 2) : 0.0;
  if (!any_zero_se) scale = std::max(1.0, scale);
  c.a_se_shifted = std::sqrt(scale * sxx / det);
  c.b_se_shifted = std::sqrt(scale * sw / det);

  if (!(c.a_shifted > 0.0)) throw IllConditionedFit("extrapolated marginal is not positive");
  return c;
}

double bayes_factor(double log_marginal_1, double log_marginal_2) {
  if (!std::isfinite(log_marginal_1) || !std::isfinite(log_marginal_2)) {
    throw std::invalid_argument("bayes_factor needs two positive finite marginals");
  }
  return std::exp(log_marginal_1 - log_marginal_2);
}

double bayes_factor(const EvidenceEstimate& e1, const EvidenceEstimate& e2) {
  return bayes_factor(e1.log_marginal, e2.log_marginal);
}

BfReport make_report(const EvidenceCurve& curve, std::span<const double> cpu_seconds, double threshold) {
  if (cpu_seconds.size() != curve.points.size()) {
    throw std::invalid_argument("make_report: one cpu timing per curve point required");
  }
  if (!(threshold > 0.0 && threshold <= 1.0)) throw std::invalid_argument("threshold must lie in (0, 1]");
  BfReport r;
  r.order = curve.order;
  r.threshold = threshold;
  r.log_reference = curve.log_a();
  r.B_y = curve.B_y();
  for (std::size_t i = 0; i < curve.points.size(); ++i) {
    const auto& pt = curve.points[i];
    BfRow row;
    row.h = pt.h;
    row.log_marginal = pt.log_marginal;
    row.se = pt.se;
    row.bf = bayes_factor(pt.log_marginal, r.log_reference);
    row.indistinguishable = row.bf >= threshold && row.bf <= 1.0 / threshold;
    row.cpu_seconds = cpu_seconds[i];
    r.rows.push_back(row);
  }
  return r;
}

StepRecommendation recommend_step(const BfReport& report) {
  if (report.rows.empty()) throw NoAdmissibleStep("empty report");
  std::vector<const BfRow*> rows;
  for (const auto& row : report.rows) rows.push_back(&row);
  std::sort(rows.begin(), rows.end(), [](const BfRow* a, const BfRow* b) { return a->h < b->h; });
  if (!rows.front()->indistinguishable) {
    throw NoAdmissibleStep("the finest step size is already distinguishable from the exact model");
  }
  const BfRow* best = rows.front();
  for (const BfRow* row : rows) {
    if (!row->indistinguishable) break;
    best = row;
  }
  StepRecommendation rec;
  rec.h = best->h;
  rec.speedup = best->cpu_seconds > 0.0 ? rows.front()->cpu_seconds / best->cpu_seconds : 1.0;
  return rec;
}

void attach_recommendation(BfReport& report) {
  try {
    report.recommendation = recommend_step(report);
  } catch (const NoAdmissibleStep& e) {
    report.recommendation.reset();
    report.warnings.emplace_back(std::string("NoAdmissibleStep: ") + e.what());
  }
}

std::string bf_report_to_json(const BfReport& report) {
  nlohmann::ordered_json j;
  j["order"] = report.order;
  j["threshold"] = report.threshold;
  j["log_reference"] = report.log_reference;
  j["B_y"] = report.B_y;
  auto rows = nlohmann::ordered_json::array();
  for (const auto& r : report.rows) {
    nlohmann::ordered_json row;
    row["h"] = r.h;
    row["log_marginal"] = r.log_marginal;
    row["se"] = r.se;
    row["BF"] = r.bf;
    row["flag"] = r.indistinguishable;
    row["cpu_seconds"] = r.cpu_seconds;
    rows.push_back(row);
  }
  j["rows"] = rows;
  if (report.recommendation) {
    j["recommended_h"] = report.recommendation->h;
    j["speedup"] = report.recommendation->speedup;
  } else {
    j["recommended_h"] = nullptr;
    j["speedup"] = nullptr;
  }
  j["warnings"] = report.warnings;
  return j.dump(2);
}

void write_bf_report_csv(std::ostream& os, const BfReport& report) {
  os << "h,log_marginal,se,BF,flag,cpu_seconds\n";
  os << std::setprecision(12);
  for (const auto& r : report.rows) {
    os << r.h << ',' << r.log_marginal << ',' << r.se << ',' << r.bf << ',' << (r.indistinguishable ? 1 : 0)
       << ',' << r.cpu_seconds << '\n';
  }
}

// ---------------------------------------------------------------- posterior discrepancy

namespace {

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return x;
}

// Normalizes log values into trapezoid-weighted probabilities (weights sum to 1).
std::vector<double> normalized_mass(const std::vector<double>& logv, const std::vector<double>& trap_weight) {
  double peak = kNegInf;
  for (double v : logv) peak = std::max(peak, v);
  if (!(peak > kNegInf)) throw BoundsTooTight("posterior vanishes on the discrepancy grid");
  std::vector<double> mass(logv.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logv.size(); ++i) {
    mass[i] = trap_weight[i] * std::exp(logv[i] - peak);
    total += mass[i];
  }
  for (double& m : mass) m /= total;
  return mass;
}

double boundary_check(const std::vector<double>& logv, const std::vector<std::size_t>& boundary) {
  double peak = kNegInf, edge = kNegInf;
  for (double v : logv) peak = std::max(peak, v);
  for (std::size_t i : boundary) edge = std::max(edge, logv[i]);
  if (edge > kNegInf && edge - peak > std::log(1e-12)) {
    throw BoundsTooTight("posterior mass reaches the discrepancy grid boundary");
  }
  return peak;
}

}  // namespace

double posterior_discrepancy(const Posterior& first, const Posterior& second, DiscrepancyStatistic statistic,
                             const DiscrepancyOptions& options) {
  const std::size_t d = first.dim();
  if (d != second.dim()) throw std::invalid_argument("posteriors differ in dimension");
  if (d > 2) throw std::invalid_argument("posterior_discrepancy supports d <= 2");
  if (options.coordinate >= d) throw std::invalid_argument("coordinate out of range");

  std::vector<std::vector<double>> axes;
  if (options.grid) {
    if (options.grid->bounds.size() != d) throw std::invalid_argument("grid dimension mismatch");
    for (const auto& [lo, hi] : options.grid->bounds) {
      axes.push_back(linspace(lo, hi, d == 1 ? options.points : std::min<std::size_t>(options.points, 801)));
    }
  } else {
    if (d != 1) throw std::invalid_argument("two-dimensional discrepancy needs an explicit grid");
    const auto b1 = bracket_posterior_1d(first);
    const auto b2 = bracket_posterior_1d(second);
    axes.push_back(linspace(std::min(b1.lower, b2.lower), std::max(b1.upper, b2.upper), options.points));
  }
  if (axes[0].size() < 3) throw std::invalid_argument("discrepancy grid needs at least 3 points");

  std::vector<double> log1, log2, weight, coord;
  std::vector<std::size_t> boundary;
  if (d == 1) {
    const auto& x = axes[0];
    for (std::size_t i = 0; i < x.size(); ++i) {
      double p[] = {x[i]};
      log1.push_back(first.log_density(p));
      log2.push_back(second.log_density(p));
      weight.push_back(i == 0 || i + 1 == x.size() ? 0.5 : 1.0);
      coord.push_back(x[i]);
    }
    boundary = {0, x.size() - 1};
  } else {
    const auto& x = axes[0];
    const auto& y = axes[1];
    for (std::size_t i = 0; i < x.size(); ++i) {
      for (std::size_t j = 0; j < y.size(); ++j) {
        double p[] = {x[i], y[j]};
        log1.push_back(first.log_density(p));
        log2.push_back(second.log_density(p));
        const double wi = (i == 0 || i + 1 == x.size()) ? 0.5 : 1.0;
        const double wj = (j == 0 || j + 1 == y.size()) ? 0.5 : 1.0;
        weight.push_back(wi * wj);
        coord.push_back(options.coordinate == 0 ? x[i] : y[j]);
        if (i == 0 || j == 0 || i + 1 == x.size() || j + 1 == y.size()) boundary.push_back(log1.size() - 1);
      }
    }
  }
  boundary_check(log1, boundary);
  boundary_check(log2, boundary);
  const auto m1 = normalized_mass(log1, weight);
  const auto m2 = normalized_mass(log2, weight);

  if (statistic == DiscrepancyStatistic::Mean) {
    double e1 = 0.0, e2 = 0.0;
    for (std::size_t i = 0; i < m1.size(); ++i) {
      e1 += m1[i] * coord[i];
      e2 += m2[i] * coord[i];
    }
    return std::abs(e1 - e2);
  }
  double tv = 0.0;
  for (std::size_t i = 0; i < m1.size(); ++i) tv += std::abs(m1[i] - m2[i]);
  return 0.5 * tv;
}

double posterior_discrepancy(const ForwardMap& forward1, const ForwardMap& forward2, const Dataset& data,
                             const Prior& prior, DiscrepancyStatistic statistic,
                             const DiscrepancyOptions& options) {
  const Posterior a(data, prior, forward1);
  const Posterior b(data, prior, forward2);
  return posterior_discrepancy(a, b, statistic, options);
}

GridDensity posterior_on_grid(const Posterior& posterior, double lower, double upper, std::size_t points) {
  if (posterior.dim() != 1) throw std::invalid_argument("posterior_on_grid needs a 1D posterior");
  if (points < 3 || !(upper > lower)) throw std::invalid_argument("posterior_on_grid: bad grid");
  GridDensity g;
  g.x = linspace(lower, upper, points);
  std::vector<double> logv, weight;
  for (std::size_t i = 0; i < points; ++i) {
    double p[] = {g.x[i]};
    logv.push_back(posterior.log_density(p));
    weight.push_back(i == 0 || i + 1 == points ? 0.5 : 1.0);
  }
  const auto mass = normalized_mass(logv, weight);
  const double dx = (upper - lower) / static_cast<double>(points - 1);
  g.density.resize(points);
  for (std::size_t i = 0; i < points; ++i) g.density[i] = mass[i] / (weight[i] * dx);
  return g;
}

}  // namespace odebf
