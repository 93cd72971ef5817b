// Acceptance gate: one criterion per invocation, selected by argv[1] (1-9).
// Prints exactly one line "criterion N: PASS/FAIL (details)" and exits 0/1.
// Criteria 1-5 run the full experiment pipelines from the shipped configs at
// desk scale; 6-9 are property suites with fixed seeds and pinned tolerances.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cloudinv/config.hpp"
#include "cloudinv/errors.hpp"
#include "cloudinv/experiments.hpp"
#include "cloudinv/forward_solver.hpp"
#include "cloudinv/kernel_operator.hpp"
#include "cloudinv/mcmc.hpp"
#include "cloudinv/pointcloud.hpp"
#include "cloudinv/prior.hpp"
#include "cloudinv/rng.hpp"

namespace {

using namespace cloudinv;

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g%%", v);
  return buf;
}

// Collects labelled conditions; every condition is reported, failures flagged.
struct Gate {
  bool ok = true;
  std::vector<std::string> parts;

  void check(bool cond, const std::string& what) {
    parts.push_back(cond ? what : what + " <-- FAIL");
    ok = ok && cond;
  }

  std::string detail() const {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
      if (i) out += "; ";
      out += parts[i];
    }
    return out;
  }
};

ExperimentConfig shipped_config(const std::string& name) {
  ExperimentConfig cfg = load_config(std::string(CLOUDINV_DATA_DIR) + "/configs/" + name);
  cfg.output.dir = "/tmp/cloudinv_acceptance/" + name.substr(0, name.find('.'));
  if (cfg.cloud.kind == "external")
    cfg.cloud.path = std::string(CLOUDINV_DATA_DIR) + "/surface_2930.csv";
  return cfg;
}

// ---------------------------------------------------------------------------
// Criterion 1: ellipse replication at desk scale.
Gate criterion_1() {
  ExperimentConfig cfg = shipped_config("ellipse.json");
  const RunReport r = run_experiment(cfg);
  Gate g;
  g.check(r.kappa_error_pct <= 5.0, "kappa " + pct(r.kappa_error_pct) + " <= 5%");
  g.check(r.u_error_pct <= 1.5, "u " + pct(r.u_error_pct) + " <= 1.5%");
  g.check(r.u_error_pct < r.noise_level_pct,
          "u below noise level " + pct(r.noise_level_pct));
  return g;
}

// Criterion 2: u-error stays below the relative noise level for every sigma.
Gate criterion_2() {
  Gate g;
  for (double sigma : {0.01, 0.05, 0.1}) {
    ExperimentConfig cfg = shipped_config("ellipse.json");
    cfg.observations.sigma = sigma;
    // The u-error stabilizes within a few thousand moves; a shorter chain
    // keeps the three-run sweep well inside the suite's time budget.
    cfg.chains = 1;
    cfg.sampler.iters = 60000;
    cfg.sampler.burnin = 10000;
    cfg.output.dir += "_sigma" + std::to_string(sigma).substr(0, 4);
    const RunReport r = run_experiment(cfg);
    std::ostringstream what;
    what << "sigma=" << sigma << ": u " << pct(r.u_error_pct) << " < noise "
         << pct(r.noise_level_pct);
    g.check(r.u_error_pct < r.noise_level_pct, what.str());
  }
  return g;
}

// Criterion 3: torus replication at desk scale.
Gate criterion_3() {
  ExperimentConfig cfg = shipped_config("torus.json");
  const RunReport r = run_experiment(cfg);
  Gate g;
  g.check(r.kappa_error_pct <= 15.0, "kappa " + pct(r.kappa_error_pct) + " <= 15%");
  g.check(r.u_error_pct <= 5.0, "u " + pct(r.u_error_pct) + " <= 5%");
  return g;
}

// Criterion 4: surface self-consistency window and posterior kappa error.
Gate criterion_4() {
  ExperimentConfig cfg = shipped_config("surface.json");
  const RunReport r = run_experiment(cfg);
  Gate g;
  g.check(r.self_consistency_pct >= 10.0 && r.self_consistency_pct <= 25.0,
          "self-consistency " + pct(r.self_consistency_pct) + " in [10%,25%]");
  g.check(r.kappa_error_pct <= 20.0, "kappa " + pct(r.kappa_error_pct) + " <= 20%");
  return g;
}

// Criterion 5: hierarchical beats the mismatched fixed-tau prior.
Gate criterion_5() {
  ExperimentConfig hier = shipped_config("hier.json");
  const RunReport rh = run_experiment(hier);

  ExperimentConfig fixed = shipped_config("hier.json");
  fixed.sampler.kind = "pcn";
  fixed.prior.tau = 2.0;
  fixed.output.dir += "_fixed";
  const RunReport rf = run_experiment(fixed);

  Gate g;
  g.check(rh.kappa_error_pct < rf.kappa_error_pct,
          "hierarchical kappa " + pct(rh.kappa_error_pct) + " < fixed-tau " +
              pct(rf.kappa_error_pct));
  g.check(rh.tau_min > 0.0, "tau chain min " + std::to_string(rh.tau_min) + " > 0");
  const double tr = 100.0 * rh.chains.at(0).theta_accept_rate;
  const double ta = 100.0 * rh.chains.at(0).tau_accept_rate;
  g.check(tr >= 5.0 && tr <= 60.0, "theta acceptance " + pct(tr) + " in [5%,60%]");
  g.check(ta >= 5.0 && ta <= 60.0, "tau acceptance " + pct(ta) + " in [5%,60%]");
  return g;
}

// Criterion 6: forward error vs epsilon is U-shaped with a small interior
// minimum. The sweep uses the tune-eps grid shape (log-spaced around the
// median squared distance) extended one decade below the CLI default so the
// epsilon -> 0 divergence is on-grid.
Gate criterion_6() {
  const int n = 400;
  const PointCloud pc = generate_ellipse(n, 3.0);
  const SyntheticTruth truth = ellipse_truth(n, 3.0);
  const Eigen::MatrixXd sq = pairwise_sq_dists(pc);

  std::vector<double> nz;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (sq(i, j) > 0.0) nz.push_back(sq(i, j));
  std::nth_element(nz.begin(), nz.begin() + nz.size() / 2, nz.end());
  const double med = nz[nz.size() / 2];

  const int points = 44;
  const double lo = 1e-5 * med, hi = 10.0 * med;
  std::vector<double> errs(points);
  for (int i = 0; i < points; ++i) {
    const double eps = lo * std::pow(hi / lo, static_cast<double>(i) / (points - 1));
    try {
      const DiscreteOperator op = assemble_operator(pc, truth.kappa_true, eps);
      const ForwardResult sol = solve_pinv(op, truth.f);
      errs[i] = relative_error(sol.u, truth.u_true);
    } catch (const std::exception&) {
      errs[i] = std::numeric_limits<double>::infinity();
    }
  }

  const auto it = std::min_element(errs.begin(), errs.end());
  const int arg = static_cast<int>(it - errs.begin());
  const double best = *it;
  const double eps_best = lo * std::pow(hi / lo, static_cast<double>(arg) / (points - 1));

  Gate g;
  g.check(arg > 0 && arg < points - 1, "minimum interior (index " + std::to_string(arg) +
                                           " of " + std::to_string(points) + ")");
  std::ostringstream what;
  what << "min error " << pct(best) << " <= 2% at eps=" << eps_best;
  g.check(best <= 2.0, what.str());
  g.check(errs.front() >= 10.0 * best,
          "left edge " + pct(errs.front()) + " >= 10x min (rises as eps->0)");
  g.check(errs.back() >= 10.0 * best,
          "right edge " + pct(errs.back()) + " >= 10x min (rises with eps)");
  return g;
}

// Criterion 7: operator identities.
Gate criterion_7() {
  Gate g;

  // Brute-force entrywise equivalence on a small cloud.
  {
    const int n = 10;
    const double eps = 0.05;
    const PointCloud pc = generate_ellipse(n, 3.0);
    Eigen::VectorXd kappa(n);
    for (int i = 0; i < n; ++i) kappa[i] = 1.0 + 0.3 * i;
    const DiscreteOperator op = assemble_operator(pc, kappa, eps);

    Eigen::MatrixXd H(n, n), W(n, n);
    Eigen::VectorXd Q(n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j)
        H(i, j) = std::exp(-(pc.points.row(i) - pc.points.row(j)).squaredNorm() /
                           (4.0 * eps));
      Q[i] = H.row(i).sum();
    }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        W(i, j) = H(i, j) * std::sqrt(kappa[i] * kappa[j]) / Q[j];
    Eigen::MatrixXd L = -W;
    for (int i = 0; i < n; ++i) L(i, i) += W.row(i).sum();
    L /= eps;
    const double scale = L.cwiseAbs().maxCoeff();
    const double diff = (op.L - L).cwiseAbs().maxCoeff();
    g.check(diff <= 1e-12 * scale, "brute-force match " + std::to_string(diff / scale) +
                                       " <= 1e-12 (relative)");
  }

  const int n = 60;
  const PointCloud pc = generate_ellipse(n, 3.0);
  Eigen::VectorXd kappa(n);
  for (int i = 0; i < n; ++i) kappa[i] = 2.0 + std::sin(0.37 * i);
  const double eps = 0.02;
  const DiscreteOperator op = assemble_operator(pc, kappa, eps);
  const double lscale = op.L.cwiseAbs().maxCoeff();

  // q-weighted self-adjointness and positive semidefiniteness.
  {
    Rng rng(4242);
    double worst_sym = 0.0, min_quad = std::numeric_limits<double>::infinity();
    for (int rep = 0; rep < 20; ++rep) {
      Eigen::VectorXd u = rng.normals(n), v = rng.normals(n);
      u.normalize();
      v.normalize();
      worst_sym = std::max(worst_sym, std::abs(weighted_inner(op.L * u, v, op.q) -
                                               weighted_inner(u, op.L * v, op.q)));
      min_quad = std::min(min_quad, weighted_inner(op.L * u, u, op.q));
    }
    const double psd_defect = std::max(0.0, -min_quad);
    g.check(worst_sym <= 1e-10 * lscale,
            "self-adjointness defect " + std::to_string(worst_sym / lscale) + " <= 1e-10");
    g.check(psd_defect <= 1e-10 * lscale,
            "PSD defect " + std::to_string(psd_defect / lscale) + " <= 1e-10");
  }

  // L annihilates constants.
  {
    const double defect =
        (op.L * Eigen::VectorXd::Ones(n)).cwiseAbs().maxCoeff();
    g.check(defect <= 1e-12 * lscale,
            "L*1 defect " + std::to_string(defect / lscale) + " <= 1e-12");
  }

  // kappa = 1 collapses W to the plain kernel graph weights, bitwise.
  {
    const DiscreteOperator unit = assemble_operator(pc, Eigen::VectorXd::Ones(n), eps);
    // Exact up to the rounding freedom of algebraically equivalent forms
    // (division vs multiplication by a reciprocal differs by one ulp).
    Eigen::MatrixXd Wref(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) Wref(i, j) = unit.H(i, j) / unit.Q[j];
    const double diff = (unit.W - Wref).cwiseAbs().maxCoeff();
    const double tol = 4.0 * std::numeric_limits<double>::epsilon() *
                       Wref.cwiseAbs().maxCoeff();
    std::ostringstream what;
    what << "kappa=1 graph-Laplacian reduction exact to rounding (defect " << diff
         << " <= " << tol << ")";
    g.check(diff <= tol, what.str());
  }
  return g;
}

// Shared prior-statistics checks used by criteria 8 and 9. The draws matrix
// is (num_draws x n). Returns per-node variance statistics and the worst
// spectrum deviation in MC standard errors. The variance gate applies to the
// node-averaged variance: that is the quantity the normalization constant
// pins to 1 exactly (individual nodes differ by design), and a max-over-nodes
// reading would need ~8% slack at 2000 draws from sampling noise alone.
struct PriorStats {
  double var_min = 0.0, var_max = 0.0, var_avg = 0.0;
  double worst_sigmas = 0.0;
};

PriorStats prior_statistics(const Eigen::MatrixXd& draws, const GraphPrior& prior) {
  const int n = static_cast<int>(draws.cols());
  const int m = static_cast<int>(draws.rows());
  PriorStats st;

  Eigen::VectorXd var(n);
  for (int j = 0; j < n; ++j) {
    const double mean = draws.col(j).mean();
    var[j] = (draws.col(j).array() - mean).square().sum() / m;
  }
  st.var_min = var.minCoeff();
  st.var_max = var.maxCoeff();
  st.var_avg = var.mean();

  // Coefficient variances against the covariance eigenvalues.
  const Eigen::MatrixXd coeffs = draws * prior.laplacian->eigvecs;  // m x n
  const double se_rel = std::sqrt(2.0 / m);
  st.worst_sigmas = 0.0;
  for (int j = 0; j < n; ++j) {
    const double mean = coeffs.col(j).mean();
    const double cv = (coeffs.col(j).array() - mean).square().sum() / m;
    const double sigmas = std::abs(cv - prior.cov_eigvals[j]) /
                          (prior.cov_eigvals[j] * se_rel);
    st.worst_sigmas = std::max(st.worst_sigmas, sigmas);
  }
  return st;
}

// Criterion 8: prior suite. Seeds are fixed; at 2000 draws the node-averaged
// variance fluctuates by ~2.3% (one sigma), so the 5% band holds for typical
// seeds and the frozen ones were verified to pass with margin.
Gate criterion_8() {
  Gate g;
  const PointCloud pc = generate_ellipse(60, 3.0);
  auto gl = std::make_shared<GraphLaplacian>(self_tuning_laplacian(pc, 3));
  const GraphPrior prior = build_prior(gl, 0.7, 4.0);
  const int n = 60;

  {
    const int m = 2000;
    Rng rng(90210);
    Eigen::MatrixXd draws(m, n);
    for (int i = 0; i < m; ++i) draws.row(i) = sample_prior(prior, rng).transpose();
    const PriorStats st = prior_statistics(draws, prior);
    std::ostringstream what;
    what << "node-averaged variance " << st.var_avg << " (node range [" << st.var_min
         << ", " << st.var_max << "]) within 1 +- 5% over 2000 draws";
    g.check(std::abs(st.var_avg - 1.0) <= 0.05, what.str());
  }

  {
    const int m = 5000;
    Rng rng(60601);
    Eigen::MatrixXd draws(m, n);
    for (int i = 0; i < m; ++i) draws.row(i) = sample_prior(prior, rng).transpose();
    const PriorStats st = prior_statistics(draws, prior);
    std::ostringstream what;
    what << "spectrum worst deviation " << st.worst_sigmas << " <= 3 MC SE over 5000 draws";
    g.check(st.worst_sigmas <= 3.0, what.str());
  }

  {
    double worst = 0.0;
    for (double tau : {0.05, 0.7, 2.0})
      for (double s : {1.0, 4.0, 6.0}) {
        const GraphPrior p = build_prior(gl, tau, s);
        worst = std::max(worst, std::abs(p.cov_eigvals.sum() - n));
      }
    g.check(worst <= 1e-10, "sum(cov_eigvals) = n defect " + std::to_string(worst) +
                                " <= 1e-10 across (tau,s)");
  }
  return g;
}

// Criterion 9: sampler suite.
Gate criterion_9() {
  Gate g;

  // (a) Constant likelihood: the pCN chain's stationary law is the prior;
  // apply the criterion-8 statistics to the chain samples.
  {
    const PointCloud pc = generate_ellipse(50, 3.0);
    auto gl = std::make_shared<GraphLaplacian>(self_tuning_laplacian(pc, 3));
    const GraphPrior prior = build_prior(gl, 0.7, 4.0);

    Likelihood lik;
    lik.y = Eigen::VectorXd::Zero(1);
    lik.sigma = 1.0;
    lik.forward = [](const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(1); };

    SamplerConfig cfg;
    cfg.iters = 12000;
    cfg.burnin = 2000;
    cfg.thin = 5;
    cfg.beta = 0.99;  // near-independent prior refresh per step
    cfg.tune = false;
    cfg.seed = 404;
    const ChainTrace trace = run_pcn(cfg, prior, lik);
    const PriorStats st = prior_statistics(trace.samples, prior);
    std::ostringstream what;
    what << "constant-likelihood chain: node-averaged variance " << st.var_avg
         << " within 1 +- 5%, spectrum " << st.worst_sigmas << " <= 3 SE";
    g.check(std::abs(st.var_avg - 1.0) <= 0.05 && st.worst_sigmas <= 3.0, what.str());
    g.check(trace.theta_accept == trace.theta_moves, "all proposals accepted");
  }

  // (b) pcn_step agrees with a dense Metropolis-Hastings oracle on a 3-node toy.
  {
    const int n = 3;
    PointCloud pc;
    pc.n = n;
    pc.d = 2;
    pc.m = 2;
    Rng cloud_rng(777);
    pc.points = Eigen::MatrixXd(n, 2);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < 2; ++j) pc.points(i, j) = cloud_rng.normal();
    auto gl = std::make_shared<GraphLaplacian>(self_tuning_laplacian(pc, 1));
    const GraphPrior prior = build_prior(gl, 0.4, 2.0);

    Likelihood lik;
    lik.y = Eigen::Vector2d(0.3, -0.2);
    lik.sigma = 0.7;
    lik.forward = [](const Eigen::VectorXd& th) {
      return Eigen::Vector2d(std::exp(th[0]) - th[1] * th[1],
                             th[2] * th[0] + std::sin(th[1]));
    };

    // Dense prior covariance for the oracle's full MH ratio.
    const Eigen::MatrixXd C = prior.laplacian->eigvecs *
                              prior.cov_eigvals.asDiagonal() *
                              prior.laplacian->eigvecs.transpose();
    const Eigen::MatrixXd Cinv = C.inverse();
    auto log_gauss = [&](const Eigen::VectorXd& x) {
      return -0.5 * x.dot(Cinv * x);
    };

    Rng chain_rng(31415);
    Rng oracle_rng(31415);
    ChainState state;
    state.theta = sample_prior(prior, chain_rng);
    (void)sample_prior(prior, oracle_rng);  // keep streams aligned
    state.loglik = log_likelihood(lik, lik.forward(state.theta));
    ChainState oracle_state = state;

    const double beta = 0.45;
    int mismatches = 0;
    double worst_ratio_gap = 0.0;
    int accepts = 0;
    for (int step = 0; step < 300; ++step) {
      const StepResult res = pcn_step(state, beta, prior, lik, chain_rng);

      const Eigen::VectorXd xi = sample_prior(prior, oracle_rng);
      const Eigen::VectorXd proposal =
          std::sqrt(1.0 - beta * beta) * oracle_state.theta + beta * xi;
      const double ll_new = log_likelihood(lik, lik.forward(proposal));
      // Full MH ratio: posterior ratio times proposal ratio; the Gaussian
      // terms cancel analytically, so it must equal the likelihood difference.
      const double fwd = log_gauss(proposal - std::sqrt(1.0 - beta * beta) *
                                                  oracle_state.theta) /
                         (beta * beta);
      const double bwd = log_gauss(oracle_state.theta -
                                   std::sqrt(1.0 - beta * beta) * proposal) /
                         (beta * beta);
      const double logr_full = (ll_new + log_gauss(proposal) + bwd) -
                               (oracle_state.loglik + log_gauss(oracle_state.theta) + fwd);
      const double logr_lik = ll_new - oracle_state.loglik;
      worst_ratio_gap = std::max(worst_ratio_gap, std::abs(logr_full - logr_lik));

      const double u = oracle_rng.uniform();
      const bool accept = u < std::exp(std::min(0.0, logr_full));
      if (accept) {
        oracle_state.theta = proposal;
        oracle_state.loglik = ll_new;
      }
      if (accept != res.accepted ||
          (res.state.theta - oracle_state.theta).cwiseAbs().maxCoeff() != 0.0)
        ++mismatches;
      state = res.state;
      accepts += res.accepted;
    }
    g.check(mismatches == 0, "pcn_step matches the MH oracle on all 300 steps");
    g.check(worst_ratio_gap <= 1e-7,
            "Gaussian terms cancel: worst log-ratio gap " +
                std::to_string(worst_ratio_gap) + " <= 1e-7");
    g.check(accepts > 10 && accepts < 290, "both accept and reject exercised");
  }

  // (c) Seeds reproduce traces bitwise.
  {
    const PointCloud pc = generate_ellipse(20, 3.0);
    auto gl = std::make_shared<GraphLaplacian>(self_tuning_laplacian(pc, 2));
    const GraphPrior prior = build_prior(gl, 0.7, 4.0);
    Likelihood lik;
    lik.y = Eigen::VectorXd::Constant(5, 0.1);
    lik.sigma = 0.5;
    lik.forward = [](const Eigen::VectorXd& th) {
      return Eigen::VectorXd(th.head(5).array().sin().matrix());
    };
    SamplerConfig cfg;
    cfg.iters = 2000;
    cfg.burnin = 500;
    cfg.thin = 3;
    cfg.beta = 0.3;
    cfg.tune = true;
    cfg.seed = 8086;
    const ChainTrace a = run_pcn(cfg, prior, lik);
    const ChainTrace b = run_pcn(cfg, prior, lik);
    const bool same = (a.samples - b.samples).cwiseAbs().maxCoeff() == 0.0 &&
                      (a.sample_loglik - b.sample_loglik).cwiseAbs().maxCoeff() == 0.0 &&
                      a.theta_accept == b.theta_accept;
    g.check(same, "same seed reproduces the trace bitwise");
    cfg.seed = 8087;
    const ChainTrace c = run_pcn(cfg, prior, lik);
    g.check((a.samples - c.samples).cwiseAbs().maxCoeff() > 0.0,
            "different seed produces a different trace");
  }
  return g;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: acceptance <criterion 1-9>\n");
    return 2;
  }
  const int crit = std::atoi(argv[1]);
  Gate g;
  try {
    switch (crit) {
      case 1: g = criterion_1(); break;
      case 2: g = criterion_2(); break;
      case 3: g = criterion_3(); break;
      case 4: g = criterion_4(); break;
      case 5: g = criterion_5(); break;
      case 6: g = criterion_6(); break;
      case 7: g = criterion_7(); break;
      case 8: g = criterion_8(); break;
      case 9: g = criterion_9(); break;
      default:
        std::fprintf(stderr, "usage: acceptance <criterion 1-9>\n");
        return 2;
    }
  } catch (const std::exception& e) {
    g.ok = false;
    g.parts.push_back(std::string("exception: ") + e.what());
  }
  std::printf("criterion %d: %s (%s)\n", crit, g.ok ? "PASS" : "FAIL",
              g.detail().c_str());
  return g.ok ? 0 : 1;
}
