#pragma once

#include <vector>

#include <Eigen/Core>

#include "cloudinv/pointcloud.hpp"

namespace cloudinv {

// Kernel discretization of u -> -div(kappa grad u) on a point cloud.
// L acts as (L u)_i = (1/epsilon) sum_j W_ij (u_i - u_j) and is self-adjoint
// positive semi-definite under the q-weighted inner product, with L 1 = 0.
struct DiscreteOperator {
  double epsilon = 0.0;
  Eigen::MatrixXd H;     // Gaussian kernel matrix exp(-|x_i-x_j|^2 / 4 eps)
  Eigen::VectorXd Q;     // row sums of H
  Eigen::VectorXd q;     // density estimate Q / (sqrt(4 pi) n eps^{m/2})
  Eigen::MatrixXd W;     // H_ij sqrt(kappa_i kappa_j) / Q_j
  Eigen::VectorXd Dvec;  // row sums of W
  Eigen::MatrixXd L;     // (diag(Dvec) - W) / epsilon
  Eigen::VectorXd kappa;
  int m = 0;             // intrinsic dimension used in the density exponent
};

Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& sq_dists, double epsilon);

Eigen::VectorXd density_estimate(const Eigen::MatrixXd& H, double epsilon, int m);

DiscreteOperator assemble_operator(const PointCloud& pc, const Eigen::VectorXd& kappa,
                                   double epsilon);

// q-weighted inner product (1/n) sum_i u_i v_i / q_i.
double weighted_inner(const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                      const Eigen::VectorXd& q);

// One row of the bandwidth sweep: T(eps) = sum_ij exp(-|x_i-x_j|^2 / 4 eps)
// and the log-log slope d log T / d log eps.
struct BandwidthPoint {
  double epsilon = 0.0;
  double T = 0.0;
  double slope = 0.0;
};

struct BandwidthScan {
  std::vector<BandwidthPoint> table;
  double suggested = 0.0;  // slope-maximizing epsilon
};

// T is exact; slopes use centered finite differences in log-log coordinates
// (one-sided at the ends). The suggested bandwidth is the slope maximizer:
// in the well-resolved regime the slope plateaus near m/2.
BandwidthScan bandwidth_diagnostic(const Eigen::MatrixXd& sq_dists,
                                   const std::vector<double>& eps_grid);

// 40 log-spaced points spanning [1e-4, 10] x median nonzero squared distance.
std::vector<double> default_eps_grid(const Eigen::MatrixXd& sq_dists);

}  // namespace cloudinv
