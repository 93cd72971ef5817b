#include "cloudinv/mcmc.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>

#include "cloudinv/errors.hpp"

namespace cloudinv {

namespace {

constexpr long kTuneInterval = 500;
constexpr double kTuneLow = 0.20;
constexpr double kTuneHigh = 0.35;
constexpr double kBetaCap = 0.99;

void validate_sampler(const SamplerConfig& cfg, bool hierarchical) {
  if (cfg.iters < cfg.burnin || cfg.burnin < 0)
    throw ValidationError("sampler: need iters >= burnin >= 0");
  if (cfg.thin < 1) throw ValidationError("sampler: thin must be >= 1");
  if (!(cfg.beta > 0.0 && cfg.beta < 1.0))
    throw ValidationError("sampler: beta must lie in (0,1)");
  if (hierarchical && !(cfg.tau_step > 0.0))
    throw ValidationError("sampler: tau_step must be positive");
}

// Type-7 interpolated quantile on a sorted vector.
double quantile_sorted(const std::vector<double>& x, double p) {
  const std::size_t n = x.size();
  if (n == 1) return x[0];
  const double h = static_cast<double>(n - 1) * p;
  const std::size_t lo = static_cast<std::size_t>(h);
  const std::size_t hi = std::min(lo + 1, n - 1);
  return x[lo] + (h - lo) * (x[hi] - x[lo]);
}

}  // namespace

double log_likelihood(const Likelihood& lik, const Eigen::VectorXd& g) {
  if (g.size() != lik.y.size())
    throw ValidationError("log_likelihood: prediction length does not match the data");
  const Eigen::VectorXd r = lik.y - g;
  if (lik.Gamma) {
    Eigen::LLT<Eigen::MatrixXd> llt(*lik.Gamma);
    if (llt.info() != Eigen::Success)
      throw ValidationError("log_likelihood: noise covariance is not positive definite");
    return -0.5 * r.dot(llt.solve(r));
  }
  if (!(lik.sigma > 0.0)) throw ValidationError("log_likelihood: sigma must be positive");
  return -0.5 * r.squaredNorm() / (lik.sigma * lik.sigma);
}

StepResult pcn_step(const ChainState& state, double beta, const GraphPrior& prior,
                    const Likelihood& lik, Rng& rng) {
  if (!(beta >= 0.0 && beta <= 1.0))
    throw ValidationError("pcn_step: beta must lie in [0,1]");
  const Eigen::VectorXd xi = sample_prior(prior, rng);
  const double keep = std::sqrt(1.0 - beta * beta);
  const Eigen::VectorXd proposal = keep * state.theta + beta * xi;

  StepResult out;
  out.state = state;
  Eigen::VectorXd g;
  try {
    g = lik.forward(proposal);
  } catch (const ComputeError&) {
    out.failed = true;
    return out;
  }
  const double ll = log_likelihood(lik, g);
  const double log_alpha = std::min(0.0, ll - state.loglik);
  const double u = rng.uniform();
  if (u < std::exp(log_alpha)) {
    out.state.theta = proposal;
    out.state.loglik = ll;
    out.accepted = true;
  }
  return out;
}

StepResult tau_step(const ChainState& state, double step, const GraphLaplacian& gl, double s,
                    const Hyperprior& pi0, Rng& rng) {
  if (!(state.tau > 0.0)) throw ValidationError("tau_step: current tau must be positive");
  if (state.prior_coeffs.size() != gl.eigvals.size())
    throw ValidationError("tau_step: stale prior coefficients");

  StepResult out;
  out.state = state;
  const double z = rng.normal();
  const double tau_new = state.tau + step * z;
  if (!(tau_new > 0.0)) return out;  // truncation of pi0 to the positive axis

  const double h_cur = hier_H(gl, s, state.tau, state.prior_coeffs);
  const double h_new = hier_H(gl, s, tau_new, state.prior_coeffs);
  double logr = -0.5 * (h_new - h_cur) + pi0.logpdf(tau_new) - pi0.logpdf(state.tau);
  logr = std::clamp(logr, -700.0, 700.0);
  const double u = rng.uniform();
  if (u < std::exp(std::min(0.0, logr))) {
    out.state.tau = tau_new;
    out.accepted = true;
  }
  return out;
}

ChainTrace run_pcn(const SamplerConfig& cfg, const GraphPrior& prior, const Likelihood& lik,
                   std::optional<Eigen::VectorXd> theta0) {
  validate_sampler(cfg, false);
  Rng rng(cfg.seed);
  const Eigen::Index n = prior.cov_eigvals.size();

  ChainState state;
  state.theta = theta0 ? std::move(*theta0) : sample_prior(prior, rng);
  state.loglik = log_likelihood(lik, lik.forward(state.theta));

  ChainTrace trace;
  trace.seed = cfg.seed;
  const long stored = (cfg.iters - cfg.burnin) / cfg.thin;
  trace.samples.resize(stored, n);
  trace.sample_loglik.resize(stored);
  trace.sample_iters.reserve(stored);

  double beta = cfg.beta;
  long window_accept = 0, window_moves = 0, row = 0;
  for (long t = 1; t <= cfg.iters; ++t) {
    StepResult res = pcn_step(state, beta, prior, lik, rng);
    state = std::move(res.state);
    const bool burnin = t <= cfg.burnin;
    if (res.failed) {
      ++trace.theta_failed;
    }
    if (burnin) {
      ++trace.theta_moves_burnin;
      trace.theta_accept_burnin += res.accepted;
    } else {
      ++trace.theta_moves;
      trace.theta_accept += res.accepted;
    }
    window_moves += 1;
    window_accept += res.accepted;

    if (cfg.tune && burnin && t % kTuneInterval == 0) {
      const double rate = static_cast<double>(window_accept) / window_moves;
      if (rate < kTuneLow) beta *= 0.7;
      else if (rate > kTuneHigh) beta = std::min(beta * 1.3, kBetaCap);
      trace.tuning.push_back({t, "beta", beta, rate});
      window_accept = window_moves = 0;
    }
    if (!burnin && (t - cfg.burnin) % cfg.thin == 0) {
      trace.samples.row(row) = state.theta.transpose();
      trace.sample_loglik[row] = state.loglik;
      trace.sample_iters.push_back(t);
      ++row;
    }
  }
  trace.beta_final = beta;
  return trace;
}

ChainTrace run_gibbs(const SamplerConfig& cfg, std::shared_ptr<const GraphLaplacian> gl,
                     double s, const Hyperprior& pi0, const Likelihood& lik,
                     std::optional<Eigen::VectorXd> theta0, std::optional<double> tau0) {
  validate_sampler(cfg, true);
  if (!gl) throw ValidationError("run_gibbs: missing graph Laplacian");
  Rng rng(cfg.seed);
  const Eigen::Index n = gl->eigvals.size();

  double tau = tau0.value_or(pi0.mean);
  if (!(tau > 0.0)) throw ValidationError("run_gibbs: initial tau must be positive");
  GraphPrior prior = build_prior(gl, tau, s);

  ChainState state;
  state.theta = theta0 ? std::move(*theta0) : sample_prior(prior, rng);
  state.tau = tau;
  state.loglik = log_likelihood(lik, lik.forward(state.theta));

  ChainTrace trace;
  trace.hierarchical = true;
  trace.seed = cfg.seed;
  const long stored = (cfg.iters - cfg.burnin) / cfg.thin;
  trace.samples.resize(stored, n);
  trace.sample_loglik.resize(stored);
  trace.sample_tau.resize(stored);
  trace.sample_iters.reserve(stored);

  double beta = cfg.beta;
  double step = cfg.tau_step;
  long wa_theta = 0, wm_theta = 0, wa_tau = 0, wm_tau = 0, row = 0;
  for (long t = 1; t <= cfg.iters; ++t) {
    const bool burnin = t <= cfg.burnin;

    StepResult res = pcn_step(state, beta, prior, lik, rng);
    state = std::move(res.state);
    if (res.failed) ++trace.theta_failed;
    if (burnin) {
      ++trace.theta_moves_burnin;
      trace.theta_accept_burnin += res.accepted;
    } else {
      ++trace.theta_moves;
      trace.theta_accept += res.accepted;
    }
    wm_theta += 1;
    wa_theta += res.accepted;

    state.prior_coeffs = gl->eigvecs.transpose() * state.theta;
    StepResult tres = tau_step(state, step, *gl, s, pi0, rng);
    if (tres.accepted) {
      state.tau = tres.state.tau;
      prior = build_prior(gl, state.tau, s);
    }
    if (burnin) {
      ++trace.tau_moves_burnin;
      trace.tau_accept_burnin += tres.accepted;
    } else {
      ++trace.tau_moves;
      trace.tau_accept += tres.accepted;
    }
    wm_tau += 1;
    wa_tau += tres.accepted;

    if (cfg.tune && burnin && t % kTuneInterval == 0) {
      const double rate_theta = static_cast<double>(wa_theta) / wm_theta;
      if (rate_theta < kTuneLow) beta *= 0.7;
      else if (rate_theta > kTuneHigh) beta = std::min(beta * 1.3, kBetaCap);
      trace.tuning.push_back({t, "beta", beta, rate_theta});
      const double rate_tau = static_cast<double>(wa_tau) / wm_tau;
      if (rate_tau < kTuneLow) step *= 0.7;
      else if (rate_tau > kTuneHigh) step *= 1.3;
      trace.tuning.push_back({t, "tau_step", step, rate_tau});
      wa_theta = wm_theta = wa_tau = wm_tau = 0;
    }
    if (!burnin && (t - cfg.burnin) % cfg.thin == 0) {
      trace.samples.row(row) = state.theta.transpose();
      trace.sample_loglik[row] = state.loglik;
      trace.sample_tau[row] = state.tau;
      trace.sample_iters.push_back(t);
      ++row;
    }
  }
  trace.beta_final = beta;
  trace.tau_step_final = step;
  return trace;
}

PosteriorSummary posterior_summary(const ChainTrace& trace, Transform transform) {
  const Eigen::Index count = trace.samples.rows();
  const Eigen::Index n = trace.samples.cols();
  if (count == 0) throw ValidationError("posterior_summary: empty trace");

  PosteriorSummary out;
  out.mean.resize(n);
  out.stddev.resize(n);
  out.q025.resize(n);
  out.q975.resize(n);
  std::vector<double> col(count);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < count; ++i) {
      const double v = trace.samples(i, j);
      col[i] = transform == Transform::Exp ? std::exp(v) : v;
    }
    double mean = 0.0;
    for (double v : col) mean += v;
    mean /= count;
    double var = 0.0;
    for (double v : col) var += (v - mean) * (v - mean);
    var /= count;
    out.mean[j] = mean;
    out.stddev[j] = std::sqrt(var);
    std::sort(col.begin(), col.end());
    out.q025[j] = quantile_sorted(col, 0.025);
    out.q975[j] = quantile_sorted(col, 0.975);
  }
  return out;
}

}  // namespace cloudinv
