#pragma once

#include <ostream>
#include <string>

#include "cloudinv/kernel_operator.hpp"
#include "cloudinv/mcmc.hpp"
#include "cloudinv/pointcloud.hpp"

namespace cloudinv {

// Shortest representation that round-trips a double exactly.
std::string format_double(double v);

// One point per line, d comma-separated fields, '#' header comment.
void write_pointcloud_csv(std::ostream& os, const PointCloud& pc);

// epsilon,T,slope rows for the bandwidth sweep.
void write_bandwidth_csv(std::ostream& os, const BandwidthScan& scan);

// Trace rows: iteration, loglik, tau (blank for non-hierarchical chains),
// then theta_1 ... theta_n.
void write_trace_csv(const std::string& path, const ChainTrace& trace);
ChainTrace read_trace_csv(const std::string& path);

}  // namespace cloudinv
