#include "lapack.hpp"

#include <lapacke.h>

#include "cloudinv/errors.hpp"

namespace cloudinv::detail {

std::pair<Eigen::VectorXd, Eigen::MatrixXd> sym_eig(const Eigen::MatrixXd& A) {
  const lapack_int n = static_cast<lapack_int>(A.rows());
  Eigen::MatrixXd vecs = A;  // column-major, overwritten with eigenvectors
  Eigen::VectorXd vals(n);
  const lapack_int info =
      LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n, vecs.data(), n, vals.data());
  if (info != 0)
    throw ComputeError("symmetric eigendecomposition failed (dsyevd info=" +
                       std::to_string(info) + ")");
  return {std::move(vals), std::move(vecs)};
}

}  // namespace cloudinv::detail
