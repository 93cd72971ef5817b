#include "cli.hpp"

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cloudinv/config.hpp"
#include "cloudinv/errors.hpp"
#include "cloudinv/experiments.hpp"
#include "cloudinv/io.hpp"
#include "cloudinv/kernel_operator.hpp"
#include "cloudinv/pointcloud.hpp"
#include "cloudinv/rng.hpp"

namespace cloudinv::cli {
namespace {

struct CommonOpts {
  std::string config;
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  std::string output;
  int chains = 1;
  std::vector<std::string> traces;
};

void add_common(CLI::App* sub, CommonOpts& o, bool with_chains) {
  sub->add_option("-c,--config", o.config, "JSON configuration file")->required();
  sub->add_option("--override", o.overrides,
                  "Override a config entry, e.g. sampler.iters=1000 (repeatable)");
  sub->add_option("--seed", o.seed, "Root seed; replaces the config seed");
  sub->add_option("-o,--output", o.output, "Output directory; replaces output.dir");
  if (with_chains)
    sub->add_option("--chains", o.chains,
                    "Number of independent chains run with derived seeds")
        ->check(CLI::PositiveNumber);
}

std::vector<std::string> effective_overrides(const CLI::App* sub, const CommonOpts& o,
                                             const char* forced_kind) {
  std::vector<std::string> ov = o.overrides;
  if (forced_kind) ov.push_back(std::string("sampler.kind=") + forced_kind);
  if (sub->count("--seed")) ov.push_back("seed=" + std::to_string(o.seed));
  if (sub->count("--output")) ov.push_back("output.dir=" + o.output);
  const CLI::Option* chains = sub->get_option_no_throw("--chains");
  if (chains && chains->count()) ov.push_back("chains=" + std::to_string(o.chains));
  return ov;
}

PointCloud working_cloud(const ExperimentConfig& cfg) {
  PointCloud full;
  if (cfg.cloud.kind == "ellipse") {
    full = generate_ellipse(cfg.cloud.n, cfg.cloud.a);
  } else if (cfg.cloud.kind == "torus") {
    full = generate_torus(cfg.cloud.n1, cfg.cloud.n2);
  } else {
    full = load_pointcloud(cfg.cloud.path, cfg.cloud.d, cfg.cloud.m);
  }
  if (cfg.cloud.subsample > 0) {
    if (cfg.cloud.subsample > full.n)
      throw ValidationError("config: cloud.subsample exceeds the cloud size");
    return subsample(full, cfg.cloud.subsample, derive_seed(cfg.seed, "subsample")).first;
  }
  return full;
}

int run_generate(const ExperimentConfig& cfg) {
  const PointCloud cloud = working_cloud(cfg);
  write_pointcloud_csv(std::cout, cloud);
  std::cerr << "wrote " << cloud.n << " points (ambient dim " << cloud.d
            << ", intrinsic dim " << cloud.m << ")\n";
  return 0;
}

int run_tune_eps(const ExperimentConfig& cfg) {
  const PointCloud cloud = working_cloud(cfg);
  const Eigen::MatrixXd sq = pairwise_sq_dists(cloud);
  const BandwidthScan scan = bandwidth_diagnostic(sq, default_eps_grid(sq));
  write_bandwidth_csv(std::cout, scan);
  std::cerr << "suggested epsilon " << format_double(scan.suggested) << "\n";
  return 0;
}

int run_forward(const ExperimentConfig& cfg) {
  PreparedExperiment prep = prepare_experiment(cfg);
  const ForwardResult sol =
      prep.engine->solve(prep.truth.kappa_true, prep.truth.f, prep.solver);
  const int m = prep.cloud.params ? static_cast<int>(prep.cloud.params->cols()) : 0;
  std::cout << "node";
  for (int j = 0; j < m; ++j) std::cout << ",omega_" << (j + 1);
  std::cout << ",kappa_true,u_true,u,f\n";
  for (int i = 0; i < prep.cloud.n; ++i) {
    std::cout << i;
    for (int j = 0; j < m; ++j)
      std::cout << "," << format_double((*prep.cloud.params)(i, j));
    std::cout << "," << format_double(prep.truth.kappa_true[i]) << ","
              << format_double(prep.truth.u_true[i]) << "," << format_double(sol.u[i])
              << "," << format_double(prep.truth.f[i]) << "\n";
  }
  std::cerr << "epsilon " << format_double(prep.cfg.op.epsilon) << "; relative error "
            << format_double(relative_error(sol.u, prep.truth.u_true))
            << "%; residual " << format_double(sol.residual) << "; skipped modes "
            << sol.skipped_modes << "\n";
  return 0;
}

void print_run_diagnostics(const RunReport& r) {
  std::cerr << "epsilon " << format_double(r.epsilon_used) << "; kappa error "
            << format_double(r.kappa_error_pct) << "%; u error "
            << format_double(r.u_error_pct) << "%; noise level "
            << format_double(r.noise_level_pct) << "%\n";
  if (r.self_consistency_pct >= 0.0)
    std::cerr << "self-consistency at true kappa: "
              << format_double(r.self_consistency_pct) << "%\n";
  if (r.tau_mean >= 0.0)
    std::cerr << "tau mean " << format_double(r.tau_mean) << "; tau min "
              << format_double(r.tau_min) << "\n";
  for (std::size_t c = 0; c < r.chains.size(); ++c) {
    std::cerr << "chain " << (c + 1) << ": theta acceptance "
              << format_double(100.0 * r.chains[c].theta_accept_rate) << "%";
    if (r.tau_mean >= 0.0)
      std::cerr << ", tau acceptance "
                << format_double(100.0 * r.chains[c].tau_accept_rate) << "%";
    if (r.chains[c].theta_failed > 0)
      std::cerr << ", failed forward solves " << r.chains[c].theta_failed;
    std::cerr << "\n";
  }
  std::cerr << "elapsed " << format_double(r.timing_sec) << " s\n";
  for (const auto& f : r.outputs) std::cerr << "wrote " << f << "\n";
}

int run_sample(const ExperimentConfig& cfg) {
  if (cfg.sampler.kind != "pcn")
    throw ValidationError(
        "config selects the hierarchical sampler; use the 'hierarchical' subcommand");
  print_run_diagnostics(run_experiment(cfg));
  return 0;
}

int run_hierarchical(const ExperimentConfig& cfg) {
  print_run_diagnostics(run_experiment(cfg));
  return 0;
}

int run_report(const ExperimentConfig& cfg, const std::vector<std::string>& traces) {
  print_run_diagnostics(summarize_from_trace(cfg, traces));
  return 0;
}

}  // namespace

int parse_and_dispatch(int argc, const char* const* argv) {
  CLI::App app{
      "cloudinv: Bayesian recovery of a diffusion coefficient on a manifold "
      "known only through a point cloud"};
  app.require_subcommand(1);
  CommonOpts o;

  CLI::App* gen = app.add_subcommand(
      "generate", "Write the configured point cloud as CSV on stdout");
  add_common(gen, o, false);

  CLI::App* tune = app.add_subcommand(
      "tune-eps",
      "Scan kernel bandwidths: CSV table (epsilon, T, slope) on stdout, "
      "suggested bandwidth on stderr");
  add_common(tune, o, false);

  CLI::App* fwd = app.add_subcommand(
      "forward",
      "Solve the discrete elliptic problem at the true diffusion; per-node CSV "
      "on stdout, error diagnostics on stderr");
  add_common(fwd, o, false);

  CLI::App* smp = app.add_subcommand(
      "sample",
      "Run pCN sampling with fixed prior regularity and write trace, summary, "
      "and report files");
  add_common(smp, o, true);

  CLI::App* hier = app.add_subcommand(
      "hierarchical",
      "Run Metropolis-within-Gibbs sampling with a hyperprior on the prior "
      "inverse length-scale");
  add_common(hier, o, true);

  CLI::App* rep = app.add_subcommand(
      "report", "Rebuild summary and report files from existing trace CSVs");
  add_common(rep, o, true);
  rep->add_option("--trace", o.traces, "Trace CSV produced by a sampling run (repeatable)")
      ->required();

  try {
    app.parse(argc, const_cast<char**>(argv));
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  CLI::App* sub = app.get_subcommands().front();
  const char* forced_kind = sub == hier ? "gibbs" : nullptr;
  try {
    const ExperimentConfig cfg = load_config(o.config, effective_overrides(sub, o, forced_kind));
    if (sub == gen) return run_generate(cfg);
    if (sub == tune) return run_tune_eps(cfg);
    if (sub == fwd) return run_forward(cfg);
    if (sub == smp) return run_sample(cfg);
    if (sub == hier) return run_hierarchical(cfg);
    return run_report(cfg, o.traces);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace cloudinv::cli
