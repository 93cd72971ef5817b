#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace cloudinv {

enum class ChartKind { Ellipse, Torus, External };

// Chart metadata for the analytically generated manifolds. External clouds
// carry no metric; asking for one is an error.
struct Chart {
  ChartKind kind = ChartKind::External;
  double a = 1.0;  // ellipse semi-major axis (the semi-minor axis is 1)

  // Riemannian metric at chart parameters w, as an m x m SPD matrix.
  Eigen::MatrixXd metric(const Eigen::VectorXd& w) const;
};

struct PointCloud {
  Eigen::MatrixXd points;                 // n x d ambient coordinates
  int n = 0;                              // point count
  int d = 0;                              // ambient dimension
  int m = 0;                              // intrinsic dimension
  std::optional<Eigen::MatrixXd> params;  // n x m chart parameters, if generated
  Chart chart;
};

// Uniform parameter grid w_i = 2*pi*(i-1)/n on [0, 2*pi), embedded as
// (cos w, a sin w). Intrinsic dimension 1, ambient dimension 2.
PointCloud generate_ellipse(int n, double a);

// Tensor grid on [0, 2*pi)^2 embedded as
// ((2+cos w1) cos w2, (2+cos w1) sin w2, sin w1). Row-major in (w1, w2).
PointCloud generate_torus(int n1, int n2);

// Reads a CSV/whitespace-delimited file of n rows with d numeric fields.
// Lines starting with '#' are ignored; an optional non-numeric header row is
// skipped. The intrinsic dimension is caller-declared.
PointCloud load_pointcloud(const std::string& path, int d, int m);

// Uniform subsample without replacement, deterministic per seed. Returned
// indices are sorted ascending and the subcloud preserves that order.
std::pair<PointCloud, std::vector<int>> subsample(const PointCloud& pc, int m_out,
                                                  std::uint64_t seed);

// Dense matrix of squared Euclidean distances |x_i - x_j|^2.
Eigen::MatrixXd pairwise_sq_dists(const PointCloud& pc);

}  // namespace cloudinv
