#pragma once

#include <vector>

#include <Eigen/Core>

#include "cloudinv/kernel_operator.hpp"
#include "cloudinv/pointcloud.hpp"

namespace cloudinv {

enum class ObservationKind { Pointwise, Smoothed };

struct ObservationMap {
  ObservationKind kind = ObservationKind::Pointwise;
  std::vector<int> indices;  // Pointwise: distinct sites into the cloud
  Eigen::MatrixXd weights;   // Smoothed: J x n kernel values K(x_j, .)
  int J = 0;
};

ObservationMap pointwise_all(int n);
// Evenly strided sites floor(i*n/J); subsets for J = n/4, n/2, n are nested.
ObservationMap pointwise_strided(int n, int J);

struct ForwardResult {
  Eigen::VectorXd u;
  double residual = 0.0;         // ||L u - f||_2 against the given f
  double meanzero_defect = 0.0;  // |<u, 1>_q| after the constant shift
  double discarded = 0.0;        // ||f - f_c||_2, the q-mean part removed from f
  int skipped_modes = 0;         // spectral modes below the rank cutoff
};

enum class SolverKind { Pinv, Eig, Cholesky };

// Relative cutoff separating the analytic zero mode from physical modes.
inline constexpr double kRankRtol = 1e-10;

// Minimum-Euclidean-norm least-squares solve of L u = f_c via SVD, where f_c
// is the q-mean-zero part of f; u is then shifted to q-mean zero.
ForwardResult solve_pinv(const DiscreteOperator& op, const Eigen::VectorXd& f);

// Spectral solve in the q-orthonormal eigenbasis of L; modes with eigenvalue
// at or below kRankRtol * lambda_max are skipped and counted.
ForwardResult solve_eig(const DiscreteOperator& op, const Eigen::VectorXd& f);

// Direct solve of the similarity-symmetrized system with the null direction
// deflated by a rank-one shift; exact on q-mean-zero right-hand sides and the
// fast path used by the samplers.
ForwardResult solve_cholesky(const DiscreteOperator& op, const Eigen::VectorXd& f);

Eigen::VectorXd observe(const ObservationMap& obs, const Eigen::VectorXd& u,
                        const Eigen::VectorXd& q);

// One-off forward map: assemble with kappa = exp(theta), solve, observe.
Eigen::VectorXd forward_map(const Eigen::VectorXd& theta, const PointCloud& pc, double epsilon,
                            const Eigen::VectorXd& f, const ObservationMap& obs,
                            SolverKind solver = SolverKind::Pinv);

// Caches every kappa-independent part of the discretization (kernel matrix,
// densities, null direction), so a solve during sampling costs one O(n^2)
// assembly plus one Cholesky factorization.
class ForwardEngine {
 public:
  ForwardEngine(const PointCloud& pc, double epsilon);

  int size() const { return n_; }
  double epsilon() const { return eps_; }
  const Eigen::VectorXd& density() const { return q_; }

  ForwardResult solve(const Eigen::VectorXd& kappa, const Eigen::VectorXd& f,
                      SolverKind solver = SolverKind::Cholesky) const;

  Eigen::VectorXd observed_forward(const Eigen::VectorXd& theta, const Eigen::VectorXd& f,
                                   const ObservationMap& obs,
                                   SolverKind solver = SolverKind::Cholesky) const;

  // Full operator for the given kappa, reusing the cached kernel matrix.
  DiscreteOperator materialize(const Eigen::VectorXd& kappa) const;

 private:
  ForwardResult solve_deflated(const Eigen::VectorXd& kappa, const Eigen::VectorXd& f) const;

  int n_ = 0;
  int m_ = 0;
  double eps_ = 0.0;
  Eigen::MatrixXd H_;          // kernel matrix
  Eigen::VectorXd Q_;          // row sums of H
  Eigen::VectorXd q_;          // density estimate
  Eigen::MatrixXd Hq_;         // H_ij / Q_j
  Eigen::MatrixXd Htilde_;     // H_ij / sqrt(Q_i Q_j)
  Eigen::VectorXd invsqrtnq_;  // 1 / sqrt(n q_i), the symmetrizing scaling
  Eigen::VectorXd zhat_;       // unit null direction of the symmetrized operator
};

}  // namespace cloudinv
