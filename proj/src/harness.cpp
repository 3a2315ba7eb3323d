#include "odebf/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "odebf/errors.hpp"
#include "odebf/logmath.hpp"

namespace odebf {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

// ---------------------------------------------------------------- spec

double ModelSpec::truth() const {
  if (name == "logistic") return logistic.lambda;
  if (name == "glucose") return glucose.theta0;
  throw std::invalid_argument("unknown model: " + name);
}

void ModelSpec::validate() const {
  if (name == "logistic") {
    odebf::validate(logistic);
  } else if (name == "glucose") {
    odebf::validate(glucose);
    if (!std::isfinite(glucose_d0) || !(glucose_load >= 0.0)) {
      throw std::invalid_argument("glucose d0 must be finite and the load non-negative");
    }
  } else {
    throw std::invalid_argument("unknown model: " + name);
  }
}

void ExperimentSpec::validate() const {
  model.validate();
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  for (double h : h_grid) {
    if (!(h > 0.0) || !std::isfinite(h)) throw std::invalid_argument("h grid entries must be positive");
  }
  if (mcmc.iterations <= mcmc.burn_in) throw std::invalid_argument("mcmc iterations must exceed burn_in");
  if (!(threshold > 0.0 && threshold <= 1.0)) throw std::invalid_argument("threshold must lie in (0, 1]");
  if (data.synthetic && (data.n < 2 || !(data.t_end > data.t_start))) {
    throw std::invalid_argument("synthetic data needs n >= 2 and t_end > t_start");
  }
  if (!data.synthetic && data.csv_path.empty()) throw std::invalid_argument("csv data source needs a path");
}

namespace {

PriorComponent parse_prior(const nlohmann::json& j) {
  const auto dist = j.at("dist").get<std::string>();
  if (dist == "gamma") return GammaPrior{j.at("shape").get<double>(), j.at("rate").get<double>()};
  if (dist == "normal") return NormalPrior{j.at("mean").get<double>(), j.at("sd").get<double>()};
  if (dist == "uniform") return UniformPrior{j.at("lower").get<double>(), j.at("upper").get<double>()};
  throw std::invalid_argument("unknown prior distribution: " + dist);
}

ojson prior_json(const PriorComponent& p) {
  ojson j;
  std::visit(
      [&j](const auto& c) {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, GammaPrior>) {
          j["dist"] = "gamma";
          j["shape"] = c.shape;
          j["rate"] = c.rate;
        } else if constexpr (std::is_same_v<T, NormalPrior>) {
          j["dist"] = "normal";
          j["mean"] = c.mean;
          j["sd"] = c.sd;
        } else {
          j["dist"] = "uniform";
          j["lower"] = c.lower;
          j["upper"] = c.upper;
        }
      },
      p);
  return j;
}

}  // namespace

ExperimentSpec parse_spec(const std::string& json_text, const fs::path& base_dir) {
  const auto j = nlohmann::json::parse(json_text);
  ExperimentSpec s;
  s.base_dir = base_dir;
  s.model.name = j.value("model", std::string("logistic"));
  const auto params = j.value("params", nlohmann::json::object());
  if (s.model.name == "logistic") {
    s.model.logistic.lambda = params.value("lambda", 1.0);
    s.model.logistic.K = params.value("K", 1000.0);
    s.model.logistic.X0 = params.value("X0", 100.0);
  } else {
    auto& g = s.model.glucose;
    g.theta0 = params.value("theta0", g.theta0);
    g.theta1 = params.value("theta1", g.theta1);
    g.theta2 = params.value("theta2", g.theta2);
    g.a = params.value("a", g.a);
    g.b = params.value("b", g.b);
    g.Gb = params.value("Gb", g.Gb);
    s.model.glucose_d0 = params.value("d0", s.model.glucose_d0);
    s.model.glucose_load = params.value("load", s.model.glucose_load);
  }
  s.sigma = j.value("sigma", 1.0);
  if (j.contains("prior")) {
    s.prior = parse_prior(j.at("prior"));
  } else if (s.model.name == "glucose") {
    s.prior = GammaPrior{5.0, 0.4};
  }
  if (j.contains("data")) {
    const auto& d = j.at("data");
    const auto source = d.value("source", std::string("synthetic"));
    if (source == "csv") {
      s.data.synthetic = false;
      s.data.csv_path = d.at("path").get<std::string>();
    } else if (source != "synthetic") {
      throw std::invalid_argument("data.source must be synthetic or csv");
    }
    s.data.t_start = d.value("t_start", s.data.t_start);
    s.data.t_end = d.value("t_end", s.data.t_end);
    s.data.n = d.value("n", s.data.n);
    if (d.contains("seed")) s.data.seed = d.at("seed").get<std::uint64_t>();
  }
  s.solver = parse_method(j.value("solver", std::string("rk4")));
  s.h_grid = j.value("h_grid", std::vector<double>{});
  if (j.contains("fit")) {
    const auto& f = j.at("fit");
    s.fit_smallest = f.value("smallest", s.fit_smallest);
    if (f.contains("h")) s.fit_h = f.at("h").get<std::vector<double>>();
  }
  if (j.contains("mcmc")) {
    const auto& m = j.at("mcmc");
    s.mcmc.iterations = m.value("iterations", s.mcmc.iterations);
    s.mcmc.burn_in = m.value("burn_in", default_burn_in(s.mcmc.iterations));
    s.mcmc.adapt_window = m.value("adapt_window", s.mcmc.adapt_window);
    s.mcmc.target_accept = m.value("target_accept", s.mcmc.target_accept);
  }
  if (j.contains("evidence")) {
    const auto& e = j.at("evidence");
    s.kde.subsample = e.value("subsample", s.kde.subsample);
    s.kde.shrink = e.value("shrink", s.kde.shrink);
    s.kde.trim_quantile = e.value("trim_quantile", s.kde.trim_quantile);
  }
  s.threshold = j.value("threshold", s.threshold);
  s.quadrature = j.value("quadrature", s.quadrature);
  s.output_dir = j.value("output_dir", s.output_dir);
  s.seed = j.value("seed", s.seed);
  s.validate();
  return s;
}

ExperimentSpec load_spec(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open spec " + path.string());
  std::stringstream buf;
  buf << is.rdbuf();
  return parse_spec(buf.str(), path.parent_path());
}

std::string spec_to_json(const ExperimentSpec& s) {
  ojson j;
  j["model"] = s.model.name;
  ojson params;
  if (s.model.name == "logistic") {
    params["lambda"] = s.model.logistic.lambda;
    params["K"] = s.model.logistic.K;
    params["X0"] = s.model.logistic.X0;
  } else {
    const auto& g = s.model.glucose;
    params["theta0"] = g.theta0;
    params["theta1"] = g.theta1;
    params["theta2"] = g.theta2;
    params["a"] = g.a;
    params["b"] = g.b;
    params["Gb"] = g.Gb;
    params["d0"] = s.model.glucose_d0;
    params["load"] = s.model.glucose_load;
  }
  j["params"] = params;
  j["sigma"] = s.sigma;
  j["prior"] = prior_json(s.prior);
  ojson data;
  if (s.data.synthetic) {
    data["source"] = "synthetic";
    data["t_start"] = s.data.t_start;
    data["t_end"] = s.data.t_end;
    data["n"] = s.data.n;
    data["seed"] = s.data.seed.value_or(s.seed);
  } else {
    data["source"] = "csv";
    data["path"] = s.data.csv_path;
  }
  j["data"] = data;
  j["solver"] = std::string(to_string(s.solver));
  j["h_grid"] = s.h_grid;
  ojson fit;
  fit["smallest"] = s.fit_smallest;
  if (s.fit_h) fit["h"] = *s.fit_h;
  j["fit"] = fit;
  j["mcmc"] = {{"iterations", s.mcmc.iterations},
               {"burn_in", s.mcmc.burn_in},
               {"adapt_window", s.mcmc.adapt_window},
               {"target_accept", s.mcmc.target_accept}};
  j["evidence"] = {{"subsample", s.kde.subsample},
                   {"shrink", s.kde.shrink},
                   {"trim_quantile", s.kde.trim_quantile}};
  j["threshold"] = s.threshold;
  j["quadrature"] = s.quadrature;
  j["output_dir"] = s.output_dir;
  j["seed"] = s.seed;
  return j.dump(2);
}

std::string spec_hash(const ExperimentSpec& spec) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : spec_to_json(spec)) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// ---------------------------------------------------------------- data

std::vector<double> uniform_times(double t_start, double t_end, std::size_t n) {
  if (n < 2 || !(t_end > t_start)) throw std::invalid_argument("uniform_times: need n >= 2 and t_end > t_start");
  std::vector<double> t(n);
  const double dt = (t_end - t_start) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) t[i] = t_start + dt * static_cast<double>(i);
  t.back() = t_end;
  return t;
}

Dataset generate_synthetic(const ModelSpec& model, std::span<const double> times, double sigma,
                           std::uint64_t seed) {
  model.validate();
  if (!(sigma >= 0.0)) throw std::invalid_argument("sigma must be non-negative");
  Dataset d;
  d.times.assign(times.begin(), times.end());
  d.sigma_fixed = sigma > 0.0 ? std::optional<double>(sigma) : std::nullopt;
  if (model.name == "logistic") {
    for (double t : times) d.values.push_back(logistic_exact(t, model.logistic));
  } else {
    const auto sys = make_glucose_system(model.glucose, model.glucose_d0, model.glucose_load);
    const double theta[] = {model.glucose.theta0};
    const auto cfg = make_solver_config(Method::RK4, 0.25 * std::ldexp(1.0, -10));
    d.values = observe_at(sys, theta, cfg, times.front(), times);
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (double& v : d.values) v += sigma * noise(rng);
  d.validate();
  return d;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_cell(std::string cell, std::size_t line) {
  cell.erase(0, cell.find_first_not_of(" \t\r"));
  cell.erase(cell.find_last_not_of(" \t\r") + 1);
  try {
    std::size_t used = 0;
    const double v = std::stod(cell, &used);
    if (used != cell.size()) throw std::invalid_argument(cell);
    return v;
  } catch (const std::exception&) {
    throw ParseError("non-numeric value '" + cell + "'", line);
  }
}

}  // namespace

Dataset load_observations(const fs::path& csv_path) {
  std::ifstream is(csv_path);
  if (!is) throw std::runtime_error("cannot open " + csv_path.string());
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(is, line)) throw ParseError("empty file, expected header t,y", line_no);
  if (split_csv(line).size() != 2) throw ParseError("header must have two columns", line_no);
  Dataset d;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 2) throw ParseError("expected two columns", line_no);
    const double t = parse_cell(cells[0], line_no);
    const double y = parse_cell(cells[1], line_no);
    if (!d.times.empty() && !(t > d.times.back())) {
      throw NonMonotoneTimes("line " + std::to_string(line_no) + ": times must be strictly increasing");
    }
    d.times.push_back(t);
    d.values.push_back(y);
  }
  if (d.times.empty()) throw ParseError("no observations", line_no);
  return d;
}

void write_observations(const fs::path& csv_path, const Dataset& data) {
  if (csv_path.has_parent_path()) fs::create_directories(csv_path.parent_path());
  std::ofstream os(csv_path);
  if (!os) throw std::runtime_error("cannot write " + csv_path.string());
  os << "t,y\n" << std::setprecision(17);
  for (std::size_t i = 0; i < data.size(); ++i) os << data.times[i] << ',' << data.values[i] << '\n';
}

Dataset make_dataset(const ExperimentSpec& spec) {
  Dataset d;
  if (spec.data.synthetic) {
    const auto times = uniform_times(spec.data.t_start, spec.data.t_end, spec.data.n);
    d = generate_synthetic(spec.model, times, spec.sigma, spec.data.seed.value_or(spec.seed));
  } else {
    fs::path p = spec.data.csv_path;
    if (p.is_relative() && !spec.base_dir.empty()) p = spec.base_dir / p;
    d = load_observations(p);
  }
  d.sigma_fixed = spec.sigma;
  d.validate();
  return d;
}

bool has_exact_solution(const ModelSpec& model) { return model.name == "logistic"; }

Posterior make_posterior(const ExperimentSpec& spec, const Dataset& data, std::optional<SolverConfig> solver) {
  Prior prior;
  prior.theta = {spec.prior};
  Dataset d = data;
  d.sigma_fixed = spec.sigma;
  if (spec.model.name == "logistic") {
    const double K = spec.model.logistic.K;
    const double X0 = spec.model.logistic.X0;
    if (solver) {
      return Posterior(d, prior, solver_forward(make_logistic_system(K, X0), *solver, 0.0, d.times));
    }
    auto oracle = [K, X0](double t, std::span<const double> theta) {
      return logistic_exact(t, LogisticParams{theta[0], K, X0});
    };
    return Posterior(d, prior, exact_forward(oracle, d.times));
  }
  if (!solver) throw std::invalid_argument("the glucose model has no closed-form solution");
  if (d.size() < 2) throw std::invalid_argument("glucose data needs the initial row plus observations");
  const double d0 = d.values.front();
  const double t0 = d.times.front();
  Dataset like = d.tail(1);
  auto sys = make_glucose_system(spec.model.glucose, d0, spec.model.glucose_load);
  return Posterior(like, prior, solver_forward(std::move(sys), *solver, t0, like.times));
}

// ---------------------------------------------------------------- sweep

HRun run_single(const ExperimentSpec& spec, const Dataset& data, double h, std::uint64_t seed, bool quadrature) {
  HRun run;
  run.h = h;
  run.seed = seed;
  const Posterior post = make_posterior(spec, data, make_solver_config(spec.solver, h));
  const LogDensityFn logpost = [&post](std::span<const double> x) { return post.log_density(x); };

  const auto start = std::chrono::steady_clock::now();
  const ModeBracket br = bracket_posterior_1d(post);
  ProposalConfig proposal;
  proposal.step_scales = {2.4 * br.sd};
  proposal.adapt_window = spec.mcmc.adapt_window;
  proposal.target_accept = spec.mcmc.target_accept;
  const double init[] = {br.mode};
  run.chain = mh_run(logpost, init, proposal, spec.mcmc.iterations, spec.mcmc.burn_in, seed);
  run.cpu_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  KdeOptions kde = spec.kde;
  kde.seed = derive_seed(seed, 1);
  run.evidence = gelfand_dey_kde(run.chain, kde);
  run.accept_rate = run.chain.accept_rate;
  run.ess = run.chain.size() >= 100 ? effective_sample_size(run.chain, 0) : 0.0;
  double mean = 0.0;
  for (std::size_t l = 0; l < run.chain.size(); ++l) mean += run.chain.at(l, 0);
  run.posterior_mean = mean / static_cast<double>(std::max<std::size_t>(1, run.chain.size()));
  run.warnings = run.chain.warnings;
  run.warnings.insert(run.warnings.end(), run.evidence.warnings.begin(), run.evidence.warnings.end());

  if (quadrature && post.dim() == 1) {
    run.quadrature_log_marginal = quadrature_marginal(post, auto_grid_1d(post)).log_marginal;
  }
  run.ok = true;
  return run;
}

namespace {

std::vector<bool> fit_mask_for(const ExperimentSpec& spec, const std::vector<CurvePoint>& points) {
  if (!spec.fit_h) {
    std::vector<std::size_t> idx(points.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return points[a].h < points[b].h; });
    std::vector<bool> mask(points.size(), false);
    for (std::size_t k = 0; k < std::min(spec.fit_smallest, idx.size()); ++k) mask[idx[k]] = true;
    return mask;
  }
  std::vector<bool> mask(points.size(), false);
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (double h : *spec.fit_h) {
      if (std::abs(points[i].h - h) <= 1e-12 * h) mask[i] = true;
    }
  }
  return mask;
}

}  // namespace

RunRecord run_sweep(const ExperimentSpec& spec, const Dataset& data, const SweepOptions& options) {
  spec.validate();
  RunRecord rec;
  rec.spec = spec;
  rec.spec_hash = spec_hash(spec);
  rec.data = data;
  rec.runs.resize(spec.h_grid.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t k = next++; k < spec.h_grid.size(); k = next++) {
      const double h = spec.h_grid[k];
      const std::uint64_t seed = derive_seed(spec.seed, k);
      try {
        rec.runs[k] = run_single(spec, data, h, seed, spec.quadrature);
      } catch (const std::exception& e) {
        HRun failed;
        failed.h = h;
        failed.seed = seed;
        failed.error = e.what();
        rec.runs[k] = std::move(failed);
      }
    }
  };
  const unsigned jobs = std::max(1u, std::min<unsigned>(options.jobs, static_cast<unsigned>(spec.h_grid.size())));
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < jobs; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  if (options.output_dir) {
    fs::create_directories(*options.output_dir);
    for (auto& run : rec.runs) {
      if (!run.ok) continue;
      const auto chain_file = *options.output_dir / ("chain_h" + format_h(run.h) + ".csv");
      write_chain_csv(chain_file.string(), run.chain);
      run.chain_path = chain_file.filename().string();
      std::ofstream js(*options.output_dir / ("evidence_h" + format_h(run.h) + ".json"));
      js << evidence_to_json(run.evidence, run.h, to_string(spec.solver)) << '\n';
    }
  }
  for (const auto& run : rec.runs) {
    if (!run.ok) rec.warnings.push_back("h=" + format_h(run.h) + " failed: " + run.error);
  }

  if (spec.quadrature && has_exact_solution(spec.model)) {
    try {
      const Posterior exact = make_posterior(spec, data, std::nullopt);
      rec.exact_log_marginal = quadrature_marginal(exact, auto_grid_1d(exact)).log_marginal;
    } catch (const std::exception& e) {
      rec.warnings.push_back(std::string("exact quadrature failed: ") + e.what());
    }
  }

  std::vector<CurvePoint> points;
  std::vector<double> cpu;
  for (const auto& run : rec.runs) {
    if (!run.ok) continue;
    points.push_back({run.h, run.evidence.log_marginal, run.evidence.mc_standard_error, order_of(spec.solver)});
    cpu.push_back(run.cpu_seconds);
  }
  if (points.size() >= 3) {
    try {
      rec.curve = fit_curve(points, order_of(spec.solver), fit_mask_for(spec, points));
      std::vector<double> cpu_sorted;
      for (const auto& pt : rec.curve->points) {
        for (std::size_t i = 0; i < points.size(); ++i) {
          if (points[i].h == pt.h) cpu_sorted.push_back(cpu[i]);
        }
      }
      rec.bf = make_report(*rec.curve, cpu_sorted, spec.threshold);
      attach_recommendation(*rec.bf);
      rec.warnings.insert(rec.warnings.end(), rec.bf->warnings.begin(), rec.bf->warnings.end());
    } catch (const IllConditionedFit& e) {
      rec.warnings.push_back(std::string("IllConditionedFit: ") + e.what());
    }
  }

  if (rec.bf && rec.bf->recommendation && spec.quadrature) {
    const double h_min = rec.bf->rows.back().h;
    try {
      const Posterior a = make_posterior(spec, data, make_solver_config(spec.solver, rec.bf->recommendation->h));
      const Posterior b = make_posterior(spec, data, make_solver_config(spec.solver, h_min));
      rec.tv_recommended_vs_finest = posterior_discrepancy(a, b, DiscrepancyStatistic::TotalVariation);
    } catch (const std::exception& e) {
      rec.warnings.push_back(std::string("posterior discrepancy failed: ") + e.what());
    }
  }
  if (!options.keep_chains) {
    for (auto& run : rec.runs) run.chain = Chain{};
  }
  return rec;
}

RunRecord run_sweep(const ExperimentSpec& spec, const SweepOptions& options) {
  return run_sweep(spec, make_dataset(spec), options);
}

// ---------------------------------------------------------------- report

std::string format_h(double h) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", h);
  return buf;
}

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10e", v);
  return buf;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream os(p);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  return os;
}

void write_histogram(const fs::path& p, const Chain& chain) {
  auto os = open_out(p);
  os << "bin_lower,bin_upper,density\n";
  if (chain.size() == 0) return;
  const auto x = chain.coordinate(0);
  const auto [lo_it, hi_it] = std::minmax_element(x.begin(), x.end());
  const double lo = *lo_it, hi = *hi_it;
  const std::size_t bins = 40;
  const double width = hi > lo ? (hi - lo) / bins : 1.0;
  std::vector<std::size_t> counts(bins, 0);
  for (double v : x) {
    auto b = static_cast<std::size_t>((v - lo) / width);
    counts[std::min(b, bins - 1)]++;
  }
  for (std::size_t b = 0; b < bins; ++b) {
    const double dens = static_cast<double>(counts[b]) / (static_cast<double>(x.size()) * width);
    os << num(lo + width * static_cast<double>(b)) << ',' << num(lo + width * static_cast<double>(b + 1)) << ','
       << num(dens) << '\n';
  }
}

}  // namespace

void report(const RunRecord& rec, const fs::path& dir) {
  fs::create_directories(dir);

  {
    auto os = open_out(dir / "table.csv");
    os << "sigma,exact_marginal,extrapolated_marginal,ratio\n";
    if (rec.curve) {
      const double la = rec.curve->log_a();
      os << num(rec.spec.sigma) << ',';
      if (rec.exact_log_marginal) {
        os << num(std::exp(*rec.exact_log_marginal)) << ',' << num(std::exp(la)) << ','
           << num(std::exp(la - *rec.exact_log_marginal)) << '\n';
      } else {
        os << ',' << num(std::exp(la)) << ",\n";
      }
    }
  }
  {
    auto os = open_out(dir / "curve.csv");
    os << "h,log_marginal,se,bf,used_in_fit,fitted_log_marginal,quadrature_log_marginal,status\n";
    for (const auto& run : rec.runs) {
      os << format_h(run.h) << ',';
      if (!run.ok) {
        os << ",,,,,,failed\n";
        continue;
      }
      os << num(run.evidence.log_marginal) << ',' << num(run.evidence.mc_standard_error) << ',';
      bool used = false;
      if (rec.curve) {
        for (std::size_t i = 0; i < rec.curve->points.size(); ++i) {
          if (rec.curve->points[i].h == run.h) used = rec.curve->used[i];
        }
        os << num(std::exp(run.evidence.log_marginal - rec.curve->log_a())) << ',' << (used ? 1 : 0) << ','
           << num(rec.curve->log_predicted(run.h)) << ',';
      } else {
        os << ",0,,";
      }
      if (run.quadrature_log_marginal) os << num(*run.quadrature_log_marginal);
      os << ",ok\n";
    }
  }
  {
    auto os = open_out(dir / "timings.csv");
    os << "h,cpu_seconds,accept_rate,ess\n";
    for (const auto& run : rec.runs) {
      os << format_h(run.h) << ',' << run.cpu_seconds << ',' << run.accept_rate << ',' << run.ess << '\n';
    }
  }
  if (rec.bf) {
    auto csv = open_out(dir / "bf_report.csv");
    write_bf_report_csv(csv, *rec.bf);
    auto js = open_out(dir / "bf_report.json");
    js << bf_report_to_json(*rec.bf) << '\n';
  }
  for (const auto& run : rec.runs) {
    if (run.ok) write_histogram(dir / ("hist_h" + format_h(run.h) + ".csv"), run.chain);
  }
  {
    auto os = open_out(dir / "summary.txt");
    os << kVersion << "  spec " << rec.spec_hash << '\n';
    os << "model " << rec.spec.model.name << ", solver " << to_string(rec.spec.solver) << ", sigma "
       << rec.spec.sigma << ", " << rec.data.size() << " observations\n";
    os << std::setprecision(6);
    for (const auto& run : rec.runs) {
      os << "  h=" << format_h(run.h);
      if (run.ok) {
        os << "  log P=" << run.evidence.log_marginal << " (se " << run.evidence.mc_standard_error << ")"
           << "  accept " << run.accept_rate << "  cpu " << run.cpu_seconds << " s\n";
      } else {
        os << "  FAILED: " << run.error << '\n';
      }
    }
    if (rec.exact_log_marginal) os << "exact marginal (quadrature): " << std::exp(*rec.exact_log_marginal) << '\n';
    if (rec.curve) {
      os << "extrapolated marginal: " << std::exp(rec.curve->log_a()) << "  B_y " << rec.curve->B_y()
         << "  R^2 " << rec.curve->r_squared << '\n';
    }
    if (rec.bf && rec.bf->recommendation) {
      os << "recommended h: " << format_h(rec.bf->recommendation->h) << "  speedup "
         << rec.bf->recommendation->speedup << "x\n";
    } else {
      os << "recommended h: none\n";
    }
    if (rec.tv_recommended_vs_finest) os << "TV(recommended, finest): " << *rec.tv_recommended_vs_finest << '\n';
    for (const auto& w : rec.warnings) os << "warning: " << w << '\n';
  }
  {
    ojson j;
    j["spec_hash"] = rec.spec_hash;
    j["version"] = rec.version;
    j["spec"] = ojson::parse(spec_to_json(rec.spec));
    auto runs = ojson::array();
    for (const auto& run : rec.runs) {
      ojson r;
      r["h"] = run.h;
      r["ok"] = run.ok;
      r["seed"] = run.seed;
      if (run.ok) {
        r["log_marginal"] = run.evidence.log_marginal;
        r["se"] = run.evidence.mc_standard_error;
        r["method"] = std::string(to_string(run.evidence.method));
        r["cpu_seconds"] = run.cpu_seconds;
        r["accept_rate"] = run.accept_rate;
        r["ess"] = run.ess;
        r["chain_path"] = run.chain_path;
        if (run.quadrature_log_marginal) r["quadrature_log_marginal"] = *run.quadrature_log_marginal;
      } else {
        r["error"] = run.error;
      }
      r["warnings"] = run.warnings;
      runs.push_back(r);
    }
    j["runs"] = runs;
    if (rec.exact_log_marginal) j["exact_log_marginal"] = *rec.exact_log_marginal;
    if (rec.curve) j["extrapolated_log_marginal"] = rec.curve->log_a();
    if (rec.bf && rec.bf->recommendation) j["recommended_h"] = rec.bf->recommendation->h;
    j["warnings"] = rec.warnings;
    auto os = open_out(dir / "run_record.json");
    os << j.dump(2) << '\n';
  }
}

}  // namespace odebf
