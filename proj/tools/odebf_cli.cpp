// odebf command-line front end: gen, sweep, evidence, report.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "odebf/bf_regress.hpp"
#include "odebf/errors.hpp"
#include "odebf/evidence.hpp"
#include "odebf/harness.hpp"

namespace fs = std::filesystem;
using namespace odebf;

namespace {

struct Common {
  std::string spec_path;
  std::string out;
  std::uint64_t seed = 0;
  bool seed_set = false;
  unsigned jobs = 1;
  std::string model;
  std::string solver;
  double h = 0.0;
};

ExperimentSpec resolve_spec(const Common& c) {
  ExperimentSpec spec;
  if (!c.spec_path.empty()) {
    spec = load_spec(c.spec_path);
  } else if (c.model == "glucose") {
    spec = parse_spec(R"({"model":"glucose","sigma":5,"data":{"t_start":0,"t_end":2,"n":5}})");
  }
  if (!c.model.empty() && c.model != spec.model.name) {
    spec.model = ModelSpec{};
    spec.model.name = c.model;
    if (c.model == "glucose") spec.prior = GammaPrior{5.0, 0.4};
  }
  if (!c.solver.empty()) spec.solver = parse_method(c.solver);
  if (c.seed_set) spec.seed = c.seed;
  if (c.h > 0.0) spec.h_grid = {c.h};
  spec.validate();
  return spec;
}

void add_common(CLI::App* app, Common& c, bool with_h) {
  app->add_option("--spec", c.spec_path, "experiment spec (JSON)");
  app->add_option("--out", c.out, "output path");
  app->add_option("--seed", c.seed, "override the experiment seed")->each([&c](const std::string&) { c.seed_set = true; });
  app->add_option("--jobs", c.jobs, "parallel workers")->check(CLI::PositiveNumber);
  app->add_option("--model", c.model, "logistic | glucose");
  app->add_option("--solver", c.solver, "euler | rk2 | rk4");
  if (with_h) {
    app->set_help_flag("--help", "Print this help message and exit");
    app->add_option("--h", c.h, "single step size");
  }
}

int cmd_gen(const Common& c) {
  const auto spec = resolve_spec(c);
  auto data = make_dataset(spec);
  const fs::path out = c.out.empty() ? fs::path("observations.csv") : fs::path(c.out);
  write_observations(out, data);
  std::cout << "wrote " << data.size() << " observations to " << out.string() << '\n';
  return 0;
}

int cmd_sweep(const Common& c) {
  const auto spec = resolve_spec(c);
  const fs::path dir = c.out.empty() ? fs::path(spec.output_dir) : fs::path(c.out);
  SweepOptions opt;
  opt.jobs = c.jobs;
  opt.output_dir = dir;
  const auto rec = run_sweep(spec, opt);
  report(rec, dir);
  std::ifstream summary(dir / "summary.txt");
  std::cout << summary.rdbuf();
  return 0;
}

int cmd_evidence(const Common& c, const std::string& chain_path, const std::string& solver_label) {
  std::string json;
  if (!chain_path.empty()) {
    const auto chain = read_chain_csv(chain_path);
    KdeOptions kde;
    if (c.seed_set) kde.seed = c.seed;
    json = evidence_to_json(gelfand_dey_kde(chain, kde, c.jobs), c.h, solver_label);
  } else {
    if (c.spec_path.empty() || !(c.h > 0.0)) {
      throw CLI::ValidationError("evidence needs --chain, or --spec with --h");
    }
    const auto spec = resolve_spec(c);
    const auto data = make_dataset(spec);
    const auto run = run_single(spec, data, c.h, derive_seed(spec.seed, 0), false);
    json = evidence_to_json(run.evidence, c.h, to_string(spec.solver));
  }
  if (c.out.empty()) {
    std::cout << json << '\n';
  } else {
    std::ofstream(c.out) << json << '\n';
  }
  return 0;
}

int cmd_report(const Common& c, const std::string& in_dir, double threshold) {
  std::vector<EvidenceRecord> records;
  for (const auto& entry : fs::directory_iterator(in_dir)) {
    const auto name = entry.path().filename().string();
    if (entry.path().extension() != ".json" || name.rfind("evidence", 0) != 0) continue;
    std::ifstream is(entry.path());
    std::stringstream buf;
    buf << is.rdbuf();
    records.push_back(evidence_from_json(buf.str()));
  }
  if (records.empty()) throw std::runtime_error("no evidence_*.json records in " + in_dir);
  const Method method = parse_method(c.solver.empty() ? records.front().solver : c.solver);

  std::map<double, double> cpu;
  std::ifstream timings(fs::path(in_dir) / "timings.csv");
  std::string line;
  if (timings && std::getline(timings, line)) {
    while (std::getline(timings, line)) {
      std::stringstream ss(line);
      std::string h, t;
      if (std::getline(ss, h, ',') && std::getline(ss, t, ',')) cpu[std::stod(h)] = std::stod(t);
    }
  }
  std::vector<CurvePoint> points;
  for (const auto& r : records) {
    points.push_back({r.h, r.estimate.log_marginal, r.estimate.mc_standard_error, order_of(method)});
  }
  auto curve = fit_curve(points, order_of(method));
  std::vector<double> seconds;
  for (const auto& pt : curve.points) {
    double best = 0.0;
    for (const auto& [h, t] : cpu) {
      if (std::abs(h - pt.h) <= 1e-9 * pt.h) best = t;
    }
    seconds.push_back(best);
  }
  auto bf = make_report(curve, seconds, threshold);
  attach_recommendation(bf);
  const fs::path dir = c.out.empty() ? fs::path(in_dir) : fs::path(c.out);
  fs::create_directories(dir);
  std::ofstream csv(dir / "bf_report.csv");
  write_bf_report_csv(csv, bf);
  std::ofstream(dir / "bf_report.json") << bf_report_to_json(bf) << '\n';
  write_bf_report_csv(std::cout, bf);
  if (bf.recommendation) {
    std::cout << "recommended h " << format_h(bf.recommendation->h) << ", speedup " << bf.recommendation->speedup
              << "x\n";
  } else {
    std::cout << "no admissible step size\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Step-size selection for ODE-constrained Bayesian inference via Bayes factors"};
  app.require_subcommand(1);

  Common gen_c, sweep_c, ev_c, rep_c;
  auto* gen = app.add_subcommand("gen", "generate a synthetic observation CSV");
  add_common(gen, gen_c, false);

  auto* sweep = app.add_subcommand("sweep", "MCMC + evidence over the step-size grid, then report");
  add_common(sweep, sweep_c, true);

  std::string chain_path, solver_label = "unknown";
  auto* ev = app.add_subcommand("evidence", "single-h evidence estimate");
  add_common(ev, ev_c, true);
  ev->add_option("--chain", chain_path, "chain CSV written by a sweep");
  ev->add_option("--label", solver_label, "solver label stored with a --chain estimate");

  std::string in_dir;
  double threshold = 0.99;
  auto* rep = app.add_subcommand("report", "fit the evidence curve from evidence_*.json records");
  add_common(rep, rep_c, false);
  rep->add_option("--in", in_dir, "directory of evidence records")->required();
  rep->add_option("--threshold", threshold, "Jeffreys window lower edge");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*gen) return cmd_gen(gen_c);
    if (*sweep) return cmd_sweep(sweep_c);
    if (*ev) return cmd_evidence(ev_c, chain_path, solver_label);
    if (*rep) return cmd_report(rep_c, in_dir, threshold);
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
