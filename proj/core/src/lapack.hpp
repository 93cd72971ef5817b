#pragma once

#include <utility>

#include <Eigen/Core>

namespace cloudinv::detail {

// Full symmetric eigendecomposition (eigenvalues ascending, orthonormal
// eigenvectors in columns) via LAPACK's divide-and-conquer driver, which is
// several times faster than Eigen's QR iteration at the sizes used here.
std::pair<Eigen::VectorXd, Eigen::MatrixXd> sym_eig(const Eigen::MatrixXd& A);

}  // namespace cloudinv::detail
