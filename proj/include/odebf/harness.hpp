/**
 * @file harness.hpp
 * @brief Experiment orchestration: synthetic data, CSV ingestion, step-size sweeps and reports.
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "odebf/bayes_core.hpp"
#include "odebf/bf_regress.hpp"
#include "odebf/evidence.hpp"
#include "odebf/mcmc.hpp"
#include "odebf/models.hpp"
#include "odebf/ode_core.hpp"

namespace odebf {

inline constexpr const char* kVersion = "odebf 1.0.0";

/// Model choice and its true (synthetic) or fixed parameters.
struct ModelSpec {
  std::string name = "logistic";  ///< "logistic" or "glucose"
  LogisticParams logistic;        ///< lambda is the synthetic truth
  GlucoseParams glucose;          ///< theta0 is the synthetic truth
  double glucose_d0 = 90.0;       ///< true G(0) for synthetic glucose data
  double glucose_load = kDefaultGlucoseLoad;

  /// True value of the inferred parameter.
  double truth() const;
  /// Validates the name and the parameter block.
  void validate() const;
};

struct DataSource {
  bool synthetic = true;
  std::string csv_path;  ///< used when !synthetic; relative paths resolve against the experiment file
  double t_start = 0.0;
  double t_end = 10.0;
  std::size_t n = 26;
  std::optional<std::uint64_t> seed;  ///< defaults to the experiment seed
};

struct McmcSettings {
  std::size_t iterations = 12'500;
  std::size_t burn_in = 2'500;
  std::size_t adapt_window = 100;
  double target_accept = 0.30;
};

struct ExperimentSpec {
  ModelSpec model;
  double sigma = 1.0;  ///< known observation noise s.d.
  PriorComponent prior = GammaPrior{2.0, 2.0};
  DataSource data;
  Method solver = Method::RK4;
  std::vector<double> h_grid;
  std::size_t fit_smallest = 4;             ///< default regression mask
  std::optional<std::vector<double>> fit_h;  ///< explicit regression subset, overrides fit_smallest
  McmcSettings mcmc;
  KdeOptions kde;
  double threshold = 0.99;
  bool quadrature = true;  ///< deterministic quadrature marginals alongside MCMC
  std::string output_dir = "out";
  std::uint64_t seed = 1;
  std::filesystem::path base_dir;  ///< directory of the experiment file

  void validate() const;
};

ExperimentSpec parse_spec(const std::string& json_text, const std::filesystem::path& base_dir = {});
ExperimentSpec load_spec(const std::filesystem::path& path);
/// Canonical JSON of an experiment; the hash is computed over this text.
std::string spec_to_json(const ExperimentSpec& spec);
std::string spec_hash(const ExperimentSpec& spec);

/// splitmix64 of seed and stream index.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

/// Uniform observation times t_start, ..., t_end (n points).
std::vector<double> uniform_times(double t_start, double t_end, std::size_t n);

/**
 * @brief y_i = f(X_theta(t_i)) + eps_i with eps_i ~ N(0, sigma^2) from mt19937_64(seed).
 *
 * Logistic truth uses the closed form; glucose truth uses RK4 at h = 0.25 * 2^-10.
 * sigma = 0 returns the exact trajectory.
 */
Dataset generate_synthetic(const ModelSpec& model, std::span<const double> times, double sigma,
                           std::uint64_t seed);

/// Header line plus two numeric columns (t, y). Throws ParseError / NonMonotoneTimes.
Dataset load_observations(const std::filesystem::path& csv_path);
void write_observations(const std::filesystem::path& csv_path, const Dataset& data);

/// Dataset of an experiment: synthetic or read from CSV, with sigma fixed to spec.sigma.
Dataset make_dataset(const ExperimentSpec& spec);

/**
 * @brief Posterior for the experiment's model. No solver means the exact forward map
 * (logistic only). For glucose the first row is the initial condition d0 and
 * is excluded from the likelihood.
 */
Posterior make_posterior(const ExperimentSpec& spec, const Dataset& data,
                         std::optional<SolverConfig> solver);
bool has_exact_solution(const ModelSpec& model);

struct HRun {
  double h = 0.0;
  bool ok = false;
  std::string error;
  EvidenceEstimate evidence;
  std::optional<double> quadrature_log_marginal;
  double cpu_seconds = 0.0;  ///< wall clock of every posterior evaluation for this h
  double accept_rate = 0.0;
  double ess = 0.0;
  double posterior_mean = 0.0;
  std::uint64_t seed = 0;
  std::string chain_path;
  std::vector<std::string> warnings;
  Chain chain;
};

struct RunRecord {
  std::string spec_hash;
  std::string version = kVersion;
  ExperimentSpec spec;
  Dataset data;
  std::vector<HRun> runs;  ///< in grid order
  std::optional<double> exact_log_marginal;
  std::optional<EvidenceCurve> curve;
  std::optional<BfReport> bf;
  std::optional<double> tv_recommended_vs_finest;
  std::vector<std::string> warnings;
};

struct SweepOptions {
  unsigned jobs = 1;
  bool keep_chains = true;            ///< retain draws in HRun::chain
  std::optional<std::filesystem::path> output_dir;  ///< chain CSVs and evidence JSON records
};

/// MCMC + evidence per h, then curve fit, recommendation and discrepancy. Failed h values are recorded.
RunRecord run_sweep(const ExperimentSpec& spec, const Dataset& data, const SweepOptions& options = {});
RunRecord run_sweep(const ExperimentSpec& spec, const SweepOptions& options = {});

/// Single-h MCMC + evidence.
HRun run_single(const ExperimentSpec& spec, const Dataset& data, double h, std::uint64_t seed,
                bool quadrature);

/**
 * @brief Writes table.csv, curve.csv, bf_report.{csv,json}, timings.csv,
 * hist_h*.csv, summary.txt and run_record.json under `dir`.
 *
 * Everything except timings.csv, bf_report.* and run_record.json is free of timings.
 */
void report(const RunRecord& record, const std::filesystem::path& dir);

std::string format_h(double h);

}  // namespace odebf
