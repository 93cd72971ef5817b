#pragma once

#include <memory>
#include <utility>

#include <Eigen/Core>

#include "cloudinv/pointcloud.hpp"
#include "cloudinv/rng.hpp"

namespace cloudinv {

// Symmetric normalized graph Laplacian with locally adaptive similarity
// bandwidths d(i) d(j), where d(i) is the distance from x_i to its k-th
// nearest neighbor (self excluded). Spectrum lies in [0, 2] with a zero
// eigenvalue whose eigenvector is proportional to A^{1/2} 1.
struct GraphLaplacian {
  Eigen::MatrixXd Delta;    // I - A^{-1/2} S A^{-1/2}
  Eigen::VectorXd eigvals;  // nondecreasing, clamped at 0
  Eigen::MatrixXd eigvecs;  // orthonormal columns
  int k = 0;                // neighbor count used for the bandwidths
};

GraphLaplacian self_tuning_laplacian(const PointCloud& pc, int k);

// Gaussian prior N(0, c_n(tau) (tau I + Delta)^{-s}) in the Laplacian
// eigenbasis. The normalizer c_n(tau) makes the per-node variance one,
// i.e. sum(cov_eigvals) = n.
struct GraphPrior {
  std::shared_ptr<const GraphLaplacian> laplacian;
  double tau = 0.0;
  double s = 0.0;
  double c = 0.0;               // c_n(tau) = n / sum_i (tau + lambda_i)^{-s}
  Eigen::VectorXd cov_eigvals;  // c_n(tau) (tau + lambda_i)^{-s}
};

GraphPrior build_prior(std::shared_ptr<const GraphLaplacian> gl, double tau, double s);

// Karhunen-Loeve draw: v = sum_i sqrt(cov_eigvals_i) xi_i phi_i.
Eigen::VectorXd sample_prior(const GraphPrior& prior, Rng& rng);

// Draw together with its eigenbasis coefficients sqrt(cov_eigvals_i) xi_i;
// the hierarchical sampler propagates these through the pCN update.
std::pair<Eigen::VectorXd, Eigen::VectorXd> sample_prior_with_coeffs(const GraphPrior& prior,
                                                                     Rng& rng);

struct PriorLogTerms {
  Eigen::VectorXd coeffs;  // <theta, phi_i>
  double H = 0.0;          // sum_i [log lambda_i(tau) + coeffs_i^2 / lambda_i(tau)]
};

// H equals -2 log N(theta; 0, C) minus the n log(2 pi) constant; only
// differences of H across tau values enter the Gibbs acceptance ratio.
PriorLogTerms prior_logdensity_terms(const GraphPrior& prior, const Eigen::VectorXd& theta);

// H(tau) for fixed eigenbasis coefficients; O(n) per tau.
double hier_H(const GraphLaplacian& gl, double s, double tau, const Eigen::VectorXd& coeffs);

}  // namespace cloudinv
