#include "cloudinv/prior.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "cloudinv/errors.hpp"
#include "lapack.hpp"

namespace cloudinv {

GraphLaplacian self_tuning_laplacian(const PointCloud& pc, int k) {
  const int n = pc.n;
  if (k < 1 || k > n - 1)
    throw ValidationError("self_tuning_laplacian: need 1 <= k <= n-1");

  const Eigen::MatrixXd sq = pairwise_sq_dists(pc);

  // d(i) = distance to the k-th nearest neighbor, self excluded.
  Eigen::VectorXd d(n);
  std::vector<double> row(n - 1);
  for (int i = 0; i < n; ++i) {
    int c = 0;
    for (int j = 0; j < n; ++j)
      if (j != i) row[c++] = sq(i, j);
    std::nth_element(row.begin(), row.begin() + (k - 1), row.end());
    const double dk2 = row[k - 1];
    if (!(dk2 > 0.0))
      throw ValidationError("self_tuning_laplacian: duplicate point makes the bandwidth at index " +
                            std::to_string(i) + " zero");
    d[i] = std::sqrt(dk2);
  }

  // S_ij = exp(-|x_i-x_j|^2 / (2 d(i) d(j))), A = diag(row sums).
  Eigen::MatrixXd S(n, n);
  for (int j = 0; j < n; ++j) {
    S(j, j) = 1.0;
    for (int i = j + 1; i < n; ++i) {
      const double v = std::exp(-sq(i, j) / (2.0 * d[i] * d[j]));
      S(i, j) = v;
      S(j, i) = v;
    }
  }
  const Eigen::VectorXd A = S.rowwise().sum();
  const Eigen::VectorXd ia = A.cwiseSqrt().cwiseInverse();

  GraphLaplacian gl;
  gl.k = k;
  gl.Delta.resize(n, n);
  for (int j = 0; j < n; ++j) {
    gl.Delta(j, j) = 1.0 - S(j, j) * ia[j] * ia[j];
    for (int i = j + 1; i < n; ++i) {
      const double v = -S(i, j) * (ia[i] * ia[j]);
      gl.Delta(i, j) = v;
      gl.Delta(j, i) = v;
    }
  }

  auto [vals, vecs] = detail::sym_eig(gl.Delta);
  gl.eigvals = vals.cwiseMax(0.0);
  gl.eigvecs = std::move(vecs);
  return gl;
}

GraphPrior build_prior(std::shared_ptr<const GraphLaplacian> gl, double tau, double s) {
  if (!gl) throw ValidationError("build_prior: missing graph Laplacian");
  if (!(tau > 0.0)) throw ValidationError("build_prior: tau must be positive");
  if (!(s > 0.0)) throw ValidationError("build_prior: s must be positive");

  GraphPrior prior;
  prior.laplacian = std::move(gl);
  prior.tau = tau;
  prior.s = s;
  const Eigen::ArrayXd pow_vals = (tau + prior.laplacian->eigvals.array()).pow(-s);
  prior.c = static_cast<double>(prior.laplacian->eigvals.size()) / pow_vals.sum();
  prior.cov_eigvals = prior.c * pow_vals;
  return prior;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> sample_prior_with_coeffs(const GraphPrior& prior,
                                                                     Rng& rng) {
  const Eigen::Index n = prior.cov_eigvals.size();
  const Eigen::VectorXd xi = rng.normals(n);
  Eigen::VectorXd coeffs = prior.cov_eigvals.cwiseSqrt().cwiseProduct(xi);
  Eigen::VectorXd v = prior.laplacian->eigvecs * coeffs;
  return {std::move(v), std::move(coeffs)};
}

Eigen::VectorXd sample_prior(const GraphPrior& prior, Rng& rng) {
  return sample_prior_with_coeffs(prior, rng).first;
}

PriorLogTerms prior_logdensity_terms(const GraphPrior& prior, const Eigen::VectorXd& theta) {
  if (!theta.allFinite())
    throw ValidationError("prior_logdensity_terms: theta is not finite");
  PriorLogTerms terms;
  terms.coeffs = prior.laplacian->eigvecs.transpose() * theta;
  if ((prior.cov_eigvals.array() <= 0.0).any())
    throw ComputeError("prior_logdensity_terms: nonpositive covariance eigenvalue");
  terms.H = (prior.cov_eigvals.array().log() +
             terms.coeffs.array().square() / prior.cov_eigvals.array())
                .sum();
  return terms;
}

double hier_H(const GraphLaplacian& gl, double s, double tau, const Eigen::VectorXd& coeffs) {
  if (!(tau > 0.0)) throw ValidationError("hier_H: tau must be positive");
  const Eigen::ArrayXd pow_vals = (tau + gl.eigvals.array()).pow(-s);
  const double c = static_cast<double>(gl.eigvals.size()) / pow_vals.sum();
  const Eigen::ArrayXd lam = c * pow_vals;
  return (lam.log() + coeffs.array().square() / lam).sum();
}

}  // namespace cloudinv
