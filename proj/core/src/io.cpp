#include "cloudinv/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <vector>

#include "cloudinv/errors.hpp"

namespace cloudinv {

std::string format_double(double v) {
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    double back;
    std::sscanf(buf, "%lf", &back);
    if (back == v) break;
  }
  return buf;
}

void write_pointcloud_csv(std::ostream& os, const PointCloud& pc) {
  os << "# point cloud: n=" << pc.n << " d=" << pc.d << " m=" << pc.m << "\n";
  for (int i = 0; i < pc.n; ++i) {
    for (int j = 0; j < pc.d; ++j) {
      if (j) os << ",";
      os << format_double(pc.points(i, j));
    }
    os << "\n";
  }
}

void write_bandwidth_csv(std::ostream& os, const BandwidthScan& scan) {
  os << "epsilon,T,slope\n";
  for (const auto& row : scan.table)
    os << format_double(row.epsilon) << "," << format_double(row.T) << ","
       << format_double(row.slope) << "\n";
}

void write_trace_csv(const std::string& path, const ChainTrace& trace) {
  std::ofstream os(path);
  if (!os) throw ComputeError("cannot write trace file '" + path + "'");
  const Eigen::Index n = trace.samples.cols();
  os << "iteration,loglik,tau";
  for (Eigen::Index j = 0; j < n; ++j) os << ",theta_" << (j + 1);
  os << "\n";
  for (Eigen::Index i = 0; i < trace.samples.rows(); ++i) {
    os << trace.sample_iters[i] << "," << format_double(trace.sample_loglik[i]) << ",";
    if (trace.hierarchical) os << format_double(trace.sample_tau[i]);
    for (Eigen::Index j = 0; j < n; ++j) os << "," << format_double(trace.samples(i, j));
    os << "\n";
  }
  if (!os) throw ComputeError("failed while writing trace file '" + path + "'");
}

namespace {

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? comma : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_field(std::string_view tok, const std::string& path, long line_no) {
  double v;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size())
    throw ValidationError("trace '" + path + "': bad numeric field at line " +
                          std::to_string(line_no));
  return v;
}

}  // namespace

ChainTrace read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open trace file '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw ValidationError("trace '" + path + "' is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv(line);
  if (header.size() < 4 || header[0] != "iteration" || header[1] != "loglik" ||
      header[2] != "tau")
    throw ValidationError("trace '" + path + "' has an unexpected header");
  const Eigen::Index n = static_cast<Eigen::Index>(header.size()) - 3;

  std::vector<long> iters;
  std::vector<double> logliks, taus;
  std::vector<double> thetas;
  bool hierarchical = false;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (static_cast<Eigen::Index>(fields.size()) != n + 3)
      throw ValidationError("trace '" + path + "': wrong field count at line " +
                            std::to_string(line_no));
    iters.push_back(static_cast<long>(parse_field(fields[0], path, line_no)));
    logliks.push_back(parse_field(fields[1], path, line_no));
    if (fields[2].empty()) {
      taus.push_back(0.0);
    } else {
      hierarchical = true;
      taus.push_back(parse_field(fields[2], path, line_no));
    }
    for (Eigen::Index j = 0; j < n; ++j)
      thetas.push_back(parse_field(fields[3 + j], path, line_no));
  }

  ChainTrace trace;
  const Eigen::Index rows = static_cast<Eigen::Index>(iters.size());
  trace.hierarchical = hierarchical;
  trace.samples.resize(rows, n);
  trace.sample_loglik.resize(rows);
  trace.sample_tau.resize(hierarchical ? rows : 0);
  trace.sample_iters = std::move(iters);
  for (Eigen::Index i = 0; i < rows; ++i) {
    trace.sample_loglik[i] = logliks[i];
    if (hierarchical) trace.sample_tau[i] = taus[i];
    for (Eigen::Index j = 0; j < n; ++j) trace.samples(i, j) = thetas[i * n + j];
  }
  return trace;
}

}  // namespace cloudinv
