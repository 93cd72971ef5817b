#include "cloudinv/forward_solver.hpp"

#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/SVD>

#include "cloudinv/errors.hpp"
#include "lapack.hpp"

namespace cloudinv {

namespace {

// Removes the q-mean component c*1 from f; returns the shift c.
double q_center(const Eigen::VectorXd& q, Eigen::VectorXd& f) {
  const double denom = q.cwiseInverse().sum();
  const double c = (f.array() / q.array()).sum() / denom;
  f.array() -= c;
  return c;
}

void shift_to_q_mean_zero(const Eigen::VectorXd& q, Eigen::VectorXd& u) {
  q_center(q, u);
}

}  // namespace

ObservationMap pointwise_all(int n) {
  ObservationMap obs;
  obs.kind = ObservationKind::Pointwise;
  obs.J = n;
  obs.indices.resize(n);
  for (int i = 0; i < n; ++i) obs.indices[i] = i;
  return obs;
}

ObservationMap pointwise_strided(int n, int J) {
  if (J < 1 || J > n) throw ValidationError("pointwise_strided: need 1 <= J <= n");
  ObservationMap obs;
  obs.kind = ObservationKind::Pointwise;
  obs.J = J;
  obs.indices.resize(J);
  for (int i = 0; i < J; ++i)
    obs.indices[i] = static_cast<int>((static_cast<long>(i) * n) / J);
  return obs;
}

ForwardResult solve_pinv(const DiscreteOperator& op, const Eigen::VectorXd& f) {
  if (!f.allFinite()) throw ComputeError("solve_pinv: right-hand side is not finite");
  const Eigen::Index n = f.size();

  Eigen::VectorXd fc = f;
  q_center(op.q, fc);
  ForwardResult res;
  res.discarded = (f - fc).norm();

  Eigen::BDCSVD<Eigen::MatrixXd> svd(op.L, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(kRankRtol);
  if (svd.info() != Eigen::Success) throw ComputeError("solve_pinv: SVD failed");
  res.u = svd.solve(fc);
  res.skipped_modes = static_cast<int>(n - svd.rank());

  shift_to_q_mean_zero(op.q, res.u);
  res.residual = (op.L * res.u - f).norm();
  res.meanzero_defect = std::abs(weighted_inner(res.u, Eigen::VectorXd::Ones(n), op.q));
  return res;
}

ForwardResult solve_eig(const DiscreteOperator& op, const Eigen::VectorXd& f) {
  if (!f.allFinite()) throw ComputeError("solve_eig: right-hand side is not finite");
  const Eigen::Index n = f.size();
  const Eigen::VectorXd invsqrtnq = (static_cast<double>(n) * op.q.array()).rsqrt();

  // Similarity-symmetrized operator: S_ij = -(1/eps) H_ij sqrt(k_i k_j / Q_i Q_j)
  // off the diagonal, diagonal Dvec_i / eps. Same spectrum as L; eigenvectors
  // map back through the q-scaling to a q-orthonormal basis.
  const Eigen::VectorXd r = (op.kappa.array() / op.Q.array()).sqrt();
  Eigen::MatrixXd S(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double v = -op.H(i, j) * r[i] * r[j] / op.epsilon;
      S(i, j) = v;
      S(j, i) = v;
    }
    S(j, j) = (op.Dvec[j] - op.W(j, j)) / op.epsilon;
  }

  auto [vals, vecs] = detail::sym_eig(S);
  const double cutoff = kRankRtol * std::max(vals.maxCoeff(), 0.0);

  const Eigen::VectorXd b = f.cwiseProduct(invsqrtnq);  // coefficients source
  const Eigen::VectorXd coeff = vecs.transpose() * b;
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
  ForwardResult res;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (vals[i] <= cutoff) {
      ++res.skipped_modes;
      continue;
    }
    w += (coeff[i] / vals[i]) * vecs.col(i);
  }
  res.u = w.cwiseQuotient(invsqrtnq);

  Eigen::VectorXd fc = f;
  q_center(op.q, fc);
  res.discarded = (f - fc).norm();
  shift_to_q_mean_zero(op.q, res.u);
  res.residual = (op.L * res.u - f).norm();
  res.meanzero_defect = std::abs(weighted_inner(res.u, Eigen::VectorXd::Ones(n), op.q));
  return res;
}

Eigen::VectorXd observe(const ObservationMap& obs, const Eigen::VectorXd& u,
                        const Eigen::VectorXd& q) {
  if (obs.kind == ObservationKind::Pointwise) {
    Eigen::VectorXd y(obs.J);
    for (int j = 0; j < obs.J; ++j) {
      const int i = obs.indices[j];
      if (i < 0 || i >= u.size())
        throw ValidationError("observe: site index " + std::to_string(i) + " out of range");
      y[j] = u[i];
    }
    return y;
  }
  // Smoothed: Monte-Carlo quadrature (1/n) sum_k K(x_j, x_k) u_k / q_k.
  if (obs.weights.cols() != u.size())
    throw ValidationError("observe: smoothing weights do not match the cloud size");
  return obs.weights * u.cwiseQuotient(q) / static_cast<double>(u.size());
}

Eigen::VectorXd forward_map(const Eigen::VectorXd& theta, const PointCloud& pc, double epsilon,
                            const Eigen::VectorXd& f, const ObservationMap& obs,
                            SolverKind solver) {
  if (!theta.allFinite() || theta.cwiseAbs().maxCoeff() > 300.0)
    throw ComputeError("forward_map: log-diffusion out of range, exp(theta) would overflow");
  const DiscreteOperator op = assemble_operator(pc, theta.array().exp(), epsilon);
  ForwardResult res;
  switch (solver) {
    case SolverKind::Pinv: res = solve_pinv(op, f); break;
    case SolverKind::Eig: res = solve_eig(op, f); break;
    case SolverKind::Cholesky: res = solve_cholesky(op, f); break;
  }
  return observe(obs, res.u, op.q);
}

ForwardEngine::ForwardEngine(const PointCloud& pc, double epsilon) {
  if (!(epsilon > 0.0)) throw ValidationError("ForwardEngine: epsilon must be positive");
  n_ = pc.n;
  m_ = pc.m;
  eps_ = epsilon;
  H_ = kernel_matrix(pairwise_sq_dists(pc), epsilon);
  Q_ = H_.rowwise().sum();
  q_ = Q_ / (std::sqrt(4.0 * M_PI) * n_ * std::pow(epsilon, 0.5 * m_));
  Hq_ = H_ * Q_.cwiseInverse().asDiagonal();
  const Eigen::VectorXd isq = Q_.cwiseSqrt().cwiseInverse();
  Htilde_ = isq.asDiagonal() * H_ * isq.asDiagonal();
  invsqrtnq_ = (static_cast<double>(n_) * q_.array()).rsqrt();
  zhat_ = invsqrtnq_.normalized();
}

DiscreteOperator ForwardEngine::materialize(const Eigen::VectorXd& kappa) const {
  for (Eigen::Index i = 0; i < kappa.size(); ++i) {
    if (!(kappa[i] > 0.0))
      throw ValidationError("ForwardEngine: kappa must be positive, entry " +
                            std::to_string(i) + " is not");
  }
  DiscreteOperator op;
  op.epsilon = eps_;
  op.m = m_;
  op.kappa = kappa;
  op.H = H_;
  op.Q = Q_;
  op.q = q_;
  const Eigen::VectorXd sk = kappa.array().sqrt();
  op.W = sk.asDiagonal() * H_ * (sk.array() / Q_.array()).matrix().asDiagonal();
  op.Dvec = op.W.rowwise().sum();
  op.L = (Eigen::MatrixXd(op.Dvec.asDiagonal()) - op.W) / eps_;
  return op;
}

ForwardResult ForwardEngine::solve_deflated(const Eigen::VectorXd& kappa,
                                            const Eigen::VectorXd& f) const {
  if (!f.allFinite()) throw ComputeError("ForwardEngine: right-hand side is not finite");
  const Eigen::VectorXd s = kappa.array().sqrt();
  const Eigen::VectorXd Dvec = s.cwiseProduct(Hq_ * s);

  // A = Lsym + gamma z z^T with Lsym the similarity-symmetrized operator and
  // z its kappa-independent unit null direction; A is SPD and A^{-1} restricted
  // to z-perp inverts Lsym exactly.
  Eigen::MatrixXd A = Htilde_;
  A.array().colwise() *= s.array();
  A.array().rowwise() *= s.transpose().array();
  A *= (-1.0 / eps_);
  A.diagonal() += Dvec / eps_;
  const double gamma = Dvec.mean() / eps_;
  A.noalias() += gamma * zhat_ * zhat_.transpose();
  const Eigen::VectorXd diagA = A.diagonal();

  Eigen::VectorXd fc = f;
  q_center(q_, fc);
  ForwardResult res;
  res.discarded = (f - fc).norm();

  const Eigen::VectorXd b = fc.cwiseProduct(invsqrtnq_);
  Eigen::LLT<Eigen::Ref<Eigen::MatrixXd>> llt(A);
  if (llt.info() != Eigen::Success)
    throw ComputeError("ForwardEngine: deflated system is not positive definite");
  const Eigen::VectorXd w = llt.solve(b);

  // The factorization overwrote the lower triangle; rebuild A*w from the
  // untouched strict upper part plus the saved diagonal.
  Eigen::VectorXd Aw = A.triangularView<Eigen::StrictlyUpper>() * w;
  Aw += A.triangularView<Eigen::StrictlyUpper>().transpose() * w;
  Aw += diagA.cwiseProduct(w);
  const Eigen::VectorXd rsym = Aw - gamma * zhat_ * zhat_.dot(w) - b;
  const Eigen::VectorXd resid_vec = rsym.cwiseQuotient(invsqrtnq_) - (f - fc);
  res.residual = resid_vec.norm();

  res.u = w.cwiseQuotient(invsqrtnq_);
  shift_to_q_mean_zero(q_, res.u);
  res.meanzero_defect = std::abs(weighted_inner(res.u, Eigen::VectorXd::Ones(n_), q_));
  return res;
}

ForwardResult ForwardEngine::solve(const Eigen::VectorXd& kappa, const Eigen::VectorXd& f,
                                   SolverKind solver) const {
  for (Eigen::Index i = 0; i < kappa.size(); ++i) {
    if (!(kappa[i] > 0.0))
      throw ComputeError("ForwardEngine: kappa must be positive, entry " +
                         std::to_string(i) + " is not");
  }
  switch (solver) {
    case SolverKind::Cholesky: return solve_deflated(kappa, f);
    case SolverKind::Pinv: return solve_pinv(materialize(kappa), f);
    case SolverKind::Eig: return solve_eig(materialize(kappa), f);
  }
  throw ValidationError("ForwardEngine: unknown solver");
}

Eigen::VectorXd ForwardEngine::observed_forward(const Eigen::VectorXd& theta,
                                                const Eigen::VectorXd& f,
                                                const ObservationMap& obs,
                                                SolverKind solver) const {
  if (!theta.allFinite() || theta.cwiseAbs().maxCoeff() > 300.0)
    throw ComputeError("ForwardEngine: log-diffusion out of range, exp(theta) would overflow");
  const ForwardResult res = solve(theta.array().exp(), f, solver);
  return observe(obs, res.u, q_);
}

ForwardResult solve_cholesky(const DiscreteOperator& op, const Eigen::VectorXd& f) {
  // One-off variant building the engine quantities from the materialized
  // operator; the samplers use ForwardEngine directly.
  if (!f.allFinite()) throw ComputeError("solve_cholesky: right-hand side is not finite");
  const Eigen::Index n = f.size();
  const Eigen::VectorXd invsqrtnq = (static_cast<double>(n) * op.q.array()).rsqrt();
  const Eigen::VectorXd zhat = invsqrtnq.normalized();
  const Eigen::VectorXd r = (op.kappa.array() / op.Q.array()).sqrt();

  Eigen::MatrixXd A = op.H;
  A.array().colwise() *= r.array();
  A.array().rowwise() *= r.transpose().array();
  A *= (-1.0 / op.epsilon);
  A.diagonal() += op.Dvec / op.epsilon;
  const double gamma = op.Dvec.mean() / op.epsilon;
  A.noalias() += gamma * zhat * zhat.transpose();

  Eigen::VectorXd fc = f;
  q_center(op.q, fc);
  ForwardResult res;
  res.discarded = (f - fc).norm();

  const Eigen::VectorXd b = fc.cwiseProduct(invsqrtnq);
  Eigen::LLT<Eigen::Ref<Eigen::MatrixXd>> llt(A);
  if (llt.info() != Eigen::Success)
    throw ComputeError("solve_cholesky: deflated system is not positive definite");
  res.u = llt.solve(b).cwiseQuotient(invsqrtnq);
  shift_to_q_mean_zero(op.q, res.u);
  res.residual = (op.L * res.u - f).norm();
  res.meanzero_defect = std::abs(weighted_inner(res.u, Eigen::VectorXd::Ones(n), op.q));
  return res;
}

}  // namespace cloudinv
