#include "cloudinv/pointcloud.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>

#include "cloudinv/errors.hpp"
#include "cloudinv/rng.hpp"

namespace cloudinv {

Eigen::MatrixXd Chart::metric(const Eigen::VectorXd& w) const {
  switch (kind) {
    case ChartKind::Ellipse: {
      Eigen::MatrixXd g(1, 1);
      const double sw = std::sin(w[0]), cw = std::cos(w[0]);
      g(0, 0) = sw * sw + a * a * cw * cw;
      return g;
    }
    case ChartKind::Torus: {
      Eigen::MatrixXd g = Eigen::MatrixXd::Zero(2, 2);
      const double r = 2.0 + std::cos(w[0]);
      g(0, 0) = 1.0;
      g(1, 1) = r * r;
      return g;
    }
    case ChartKind::External:
      throw ValidationError("external point clouds carry no chart metric");
  }
  throw ValidationError("unknown chart kind");
}

PointCloud generate_ellipse(int n, double a) {
  if (n < 2) throw ValidationError("generate_ellipse: n must be >= 2");
  if (!(a > 0.0)) throw ValidationError("generate_ellipse: semi-major axis must be positive");
  PointCloud pc;
  pc.n = n;
  pc.d = 2;
  pc.m = 1;
  pc.points.resize(n, 2);
  Eigen::MatrixXd params(n, 1);
  for (int i = 0; i < n; ++i) {
    const double w = 2.0 * M_PI * i / n;
    params(i, 0) = w;
    pc.points(i, 0) = std::cos(w);
    pc.points(i, 1) = a * std::sin(w);
  }
  pc.params = std::move(params);
  pc.chart = Chart{ChartKind::Ellipse, a};
  return pc;
}

PointCloud generate_torus(int n1, int n2) {
  if (n1 < 2 || n2 < 2) throw ValidationError("generate_torus: grid sides must be >= 2");
  PointCloud pc;
  pc.n = n1 * n2;
  pc.d = 3;
  pc.m = 2;
  pc.points.resize(pc.n, 3);
  Eigen::MatrixXd params(pc.n, 2);
  for (int i1 = 0; i1 < n1; ++i1) {
    const double w1 = 2.0 * M_PI * i1 / n1;
    const double r = 2.0 + std::cos(w1);
    for (int i2 = 0; i2 < n2; ++i2) {
      const double w2 = 2.0 * M_PI * i2 / n2;
      const int i = i1 * n2 + i2;
      params(i, 0) = w1;
      params(i, 1) = w2;
      pc.points(i, 0) = r * std::cos(w2);
      pc.points(i, 1) = r * std::sin(w2);
      pc.points(i, 2) = std::sin(w1);
    }
  }
  pc.params = std::move(params);
  pc.chart = Chart{ChartKind::Torus, 1.0};
  return pc;
}

namespace {

bool parse_double(std::string_view tok, double& out) {
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == ',')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != ',') ++j;
    if (j > i) fields.push_back(line.substr(i, j - i));
    i = j;
  }
  return fields;
}

}  // namespace

PointCloud load_pointcloud(const std::string& path, int d, int m) {
  if (d < 1 || m < 1 || m > d)
    throw ValidationError("load_pointcloud: need d >= m >= 1");
  std::ifstream in(path);
  if (!in) throw ValidationError("load_pointcloud: cannot open '" + path + "'");

  std::vector<double> values;
  std::string line;
  long line_no = 0;
  bool seen_data = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string_view sv(line);
    const auto start = sv.find_first_not_of(" \t");
    if (start == std::string_view::npos) continue;
    if (sv[start] == '#') continue;
    const auto fields = split_fields(sv);
    if (fields.empty()) continue;

    std::vector<double> row;
    row.reserve(fields.size());
    bool numeric = true;
    for (const auto& tok : fields) {
      double v;
      if (!parse_double(tok, v)) {
        numeric = false;
        break;
      }
      row.push_back(v);
    }
    if (!numeric) {
      if (!seen_data) continue;  // header row
      throw ValidationError("load_pointcloud: non-numeric field at line " +
                            std::to_string(line_no) + " of '" + path + "'");
    }
    if (static_cast<int>(row.size()) != d)
      throw ValidationError("load_pointcloud: expected " + std::to_string(d) +
                            " fields but found " + std::to_string(row.size()) +
                            " at line " + std::to_string(line_no) + " of '" + path + "'");
    for (double v : row) {
      if (!std::isfinite(v))
        throw ValidationError("load_pointcloud: non-finite value at line " +
                              std::to_string(line_no) + " of '" + path + "'");
    }
    seen_data = true;
    values.insert(values.end(), row.begin(), row.end());
  }
  const long n = static_cast<long>(values.size()) / d;
  if (n < 2) throw ValidationError("load_pointcloud: '" + path + "' holds fewer than 2 points");

  PointCloud pc;
  pc.n = static_cast<int>(n);
  pc.d = d;
  pc.m = m;
  pc.points.resize(n, d);
  for (long i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) pc.points(i, j) = values[i * d + j];
  pc.chart = Chart{ChartKind::External, 1.0};
  return pc;
}

std::pair<PointCloud, std::vector<int>> subsample(const PointCloud& pc, int m_out,
                                                  std::uint64_t seed) {
  if (m_out < 2 || m_out > pc.n)
    throw ValidationError("subsample: requested size " + std::to_string(m_out) +
                          " outside [2, " + std::to_string(pc.n) + "]");
  std::vector<int> idx(pc.n);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  for (int i = 0; i < m_out; ++i) {
    const int j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(pc.n - i)));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(m_out);
  std::sort(idx.begin(), idx.end());

  PointCloud sub;
  sub.n = m_out;
  sub.d = pc.d;
  sub.m = pc.m;
  sub.points.resize(m_out, pc.d);
  if (pc.params) {
    Eigen::MatrixXd params(m_out, pc.params->cols());
    for (int i = 0; i < m_out; ++i) params.row(i) = pc.params->row(idx[i]);
    sub.params = std::move(params);
  }
  for (int i = 0; i < m_out; ++i) sub.points.row(i) = pc.points.row(idx[i]);
  sub.chart = pc.chart;
  return {std::move(sub), std::move(idx)};
}

Eigen::MatrixXd pairwise_sq_dists(const PointCloud& pc) {
  const int n = pc.n;
  Eigen::MatrixXd D(n, n);
  for (int i = 0; i < n; ++i) {
    D(i, i) = 0.0;
    for (int j = i + 1; j < n; ++j) {
      const double d2 = (pc.points.row(i) - pc.points.row(j)).squaredNorm();
      D(i, j) = d2;
      D(j, i) = d2;
    }
  }
  return D;
}

}  // namespace cloudinv
