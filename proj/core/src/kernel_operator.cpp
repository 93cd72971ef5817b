#include "cloudinv/kernel_operator.hpp"

#include <algorithm>
#include <cmath>

#include "cloudinv/errors.hpp"

namespace cloudinv {

Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& sq_dists, double epsilon) {
  if (!(epsilon > 0.0)) throw ValidationError("kernel_matrix: epsilon must be positive");
  return (-sq_dists.array() / (4.0 * epsilon)).exp();
}

Eigen::VectorXd density_estimate(const Eigen::MatrixXd& H, double epsilon, int m) {
  if (!(epsilon > 0.0)) throw ValidationError("density_estimate: epsilon must be positive");
  const double n = static_cast<double>(H.rows());
  const double norm = std::sqrt(4.0 * M_PI) * n * std::pow(epsilon, 0.5 * m);
  return H.rowwise().sum() / norm;
}

DiscreteOperator assemble_operator(const PointCloud& pc, const Eigen::VectorXd& kappa,
                                   double epsilon) {
  if (!(epsilon > 0.0)) throw ValidationError("assemble_operator: epsilon must be positive");
  if (kappa.size() != pc.n)
    throw ValidationError("assemble_operator: kappa length does not match the cloud");
  for (Eigen::Index i = 0; i < kappa.size(); ++i) {
    if (!(kappa[i] > 0.0))
      throw ValidationError("assemble_operator: kappa must be positive, entry " +
                            std::to_string(i) + " is not");
  }

  DiscreteOperator op;
  op.epsilon = epsilon;
  op.m = pc.m;
  op.kappa = kappa;
  op.H = kernel_matrix(pairwise_sq_dists(pc), epsilon);
  op.Q = op.H.rowwise().sum();
  op.q = op.Q / (std::sqrt(4.0 * M_PI) * pc.n * std::pow(epsilon, 0.5 * pc.m));

  const Eigen::VectorXd sk = kappa.array().sqrt();
  // W_ij = H_ij sqrt(kappa_i kappa_j) / Q_j
  op.W = sk.asDiagonal() * op.H * (sk.array() / op.Q.array()).matrix().asDiagonal();
  op.Dvec = op.W.rowwise().sum();
  op.L = (Eigen::MatrixXd(op.Dvec.asDiagonal()) - op.W) / epsilon;
  return op;
}

double weighted_inner(const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                      const Eigen::VectorXd& q) {
  if (u.size() != v.size() || u.size() != q.size())
    throw ValidationError("weighted_inner: vector sizes differ");
  return (u.array() * v.array() / q.array()).sum() / static_cast<double>(u.size());
}

BandwidthScan bandwidth_diagnostic(const Eigen::MatrixXd& sq_dists,
                                   const std::vector<double>& eps_grid) {
  if (eps_grid.size() < 2)
    throw ValidationError("bandwidth_diagnostic: need at least two grid points");
  for (std::size_t i = 0; i < eps_grid.size(); ++i) {
    if (!(eps_grid[i] > 0.0))
      throw ValidationError("bandwidth_diagnostic: epsilon grid must be positive");
    if (i > 0 && !(eps_grid[i] > eps_grid[i - 1]))
      throw ValidationError("bandwidth_diagnostic: epsilon grid must be strictly increasing");
  }

  const std::size_t g = eps_grid.size();
  std::vector<double> logT(g), logE(g);
  BandwidthScan scan;
  scan.table.resize(g);
  for (std::size_t i = 0; i < g; ++i) {
    const double T = (-sq_dists.array() / (4.0 * eps_grid[i])).exp().sum();
    scan.table[i].epsilon = eps_grid[i];
    scan.table[i].T = T;
    logT[i] = std::log(T);
    logE[i] = std::log(eps_grid[i]);
  }
  for (std::size_t i = 0; i < g; ++i) {
    const std::size_t lo = (i == 0) ? 0 : i - 1;
    const std::size_t hi = (i + 1 == g) ? i : i + 1;
    scan.table[i].slope = (lo == hi) ? 0.0 : (logT[hi] - logT[lo]) / (logE[hi] - logE[lo]);
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < g; ++i)
    if (scan.table[i].slope > scan.table[best].slope) best = i;
  scan.suggested = eps_grid[best];
  return scan;
}

std::vector<double> default_eps_grid(const Eigen::MatrixXd& sq_dists) {
  const Eigen::Index n = sq_dists.rows();
  std::vector<double> nonzero;
  nonzero.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      if (sq_dists(i, j) > 0.0) nonzero.push_back(sq_dists(i, j));
  if (nonzero.empty()) throw ValidationError("default_eps_grid: all pairwise distances are zero");
  const auto mid = nonzero.begin() + nonzero.size() / 2;
  std::nth_element(nonzero.begin(), mid, nonzero.end());
  const double median = *mid;

  constexpr int kPoints = 40;
  const double lo = std::log(1e-4 * median);
  const double hi = std::log(10.0 * median);
  std::vector<double> grid(kPoints);
  for (int i = 0; i < kPoints; ++i)
    grid[i] = std::exp(lo + (hi - lo) * i / (kPoints - 1));
  return grid;
}

}  // namespace cloudinv
