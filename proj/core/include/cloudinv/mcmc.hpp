#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "cloudinv/prior.hpp"
#include "cloudinv/rng.hpp"

namespace cloudinv {

// Gaussian observation model y = G(theta) + eta, eta ~ N(0, Gamma).
// Gamma is sigma^2 I unless an explicit SPD matrix is supplied.
struct Likelihood {
  Eigen::VectorXd y;
  double sigma = 1.0;
  std::optional<Eigen::MatrixXd> Gamma;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> forward;
};

// -1/2 (y-g)^T Gamma^{-1} (y-g)
double log_likelihood(const Likelihood& lik, const Eigen::VectorXd& g);

struct ChainState {
  Eigen::VectorXd theta;
  double tau = 0.0;               // hierarchical only
  double loglik = 0.0;            // cached; one forward solve per move
  Eigen::VectorXd prior_coeffs;   // cached <theta, phi_i>, refreshed by the
                                  // Gibbs driver before each tau move
};

struct StepResult {
  ChainState state;
  bool accepted = false;
  bool failed = false;  // forward map threw; proposal auto-rejected
};

struct TuningEvent {
  long iteration = 0;
  std::string knob;  // "beta" or "tau_step"
  double value = 0.0;
  double rate = 0.0;  // window acceptance rate that triggered the change
};

struct ChainTrace {
  Eigen::MatrixXd samples;  // stored x n, post-burn-in thinned states
  std::vector<long> sample_iters;
  Eigen::VectorXd sample_loglik;
  Eigen::VectorXd sample_tau;  // size 0 for non-hierarchical chains
  bool hierarchical = false;

  long theta_accept = 0, theta_moves = 0;                // post-burn-in
  long theta_accept_burnin = 0, theta_moves_burnin = 0;
  long theta_failed = 0;                                 // all phases
  long tau_accept = 0, tau_moves = 0;
  long tau_accept_burnin = 0, tau_moves_burnin = 0;

  std::vector<TuningEvent> tuning;
  std::uint64_t seed = 0;
  double beta_final = 0.0;
  double tau_step_final = 0.0;

  double theta_accept_rate() const {
    return theta_moves ? static_cast<double>(theta_accept) / theta_moves : 0.0;
  }
  double tau_accept_rate() const {
    return tau_moves ? static_cast<double>(tau_accept) / tau_moves : 0.0;
  }
};

struct SamplerConfig {
  long iters = 200000;
  long burnin = 50000;
  int thin = 10;
  double beta = 0.02;
  double tau_step = 0.2;
  bool tune = false;  // burn-in-only adaptation toward 20-35% acceptance
  std::uint64_t seed = 1;
};

// Hyperprior on tau: N(mean, sd^2) truncated to tau > 0 by proposal rejection.
struct Hyperprior {
  double mean = 2.0;
  double sd = 1.0;
  double logpdf(double tau) const {
    const double z = (tau - mean) / sd;
    return -0.5 * z * z;
  }
};

// One pCN move: theta* = sqrt(1-beta^2) theta + beta xi with xi a prior draw.
// The prior/proposal ratio cancels, so acceptance uses only the likelihood
// difference. Consumes n normals plus one uniform from rng.
StepResult pcn_step(const ChainState& state, double beta, const GraphPrior& prior,
                    const Likelihood& lik, Rng& rng);

ChainTrace run_pcn(const SamplerConfig& cfg, const GraphPrior& prior, const Likelihood& lik,
                   std::optional<Eigen::VectorXd> theta0 = std::nullopt);

// Random-walk move on tau given theta (through its cached coefficients).
// Nonpositive proposals are auto-rejected, which realizes the truncation of
// the hyperprior to tau > 0.
StepResult tau_step(const ChainState& state, double step, const GraphLaplacian& gl, double s,
                    const Hyperprior& pi0, Rng& rng);

// Metropolis-within-Gibbs: one pCN theta move and one tau move per sweep.
// tau0 defaults to the hyperprior mean.
ChainTrace run_gibbs(const SamplerConfig& cfg, std::shared_ptr<const GraphLaplacian> gl,
                     double s, const Hyperprior& pi0, const Likelihood& lik,
                     std::optional<Eigen::VectorXd> theta0 = std::nullopt,
                     std::optional<double> tau0 = std::nullopt);

enum class Transform { Identity, Exp };

struct PosteriorSummary {
  Eigen::VectorXd mean, stddev, q025, q975;
};

// Pointwise statistics over stored samples; Transform::Exp summarizes
// kappa = exp(theta), quantiles taken after the transform.
PosteriorSummary posterior_summary(const ChainTrace& trace, Transform transform);

}  // namespace cloudinv
