#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cloudinv/errors.hpp"

namespace cloudinv {

struct CloudConfig {
  std::string kind = "ellipse";  // ellipse | torus | external
  int n = 400;                   // ellipse point count
  double a = 3.0;                // ellipse semi-major axis
  int n1 = 20, n2 = 20;          // torus grid sides
  std::string path;              // external CSV file
  int d = 3, m = 2;              // external dimensions
  int subsample = 0;             // 0 = keep the full cloud
};

struct TruthConfig {
  std::string kind = "ellipse";  // ellipse | torus | surface | exp_cos
  int freq = 1;                  // exp_cos: kappa = exp(cos(freq w))
  int fine_factor = 4;           // exp_cos: refinement of the data-side grid
  double tau = 0.7, s = 6.0;     // surface: full-cloud prior parameters
  int k = 100;                   // surface: full-cloud graph neighbors
  double epsilon = 0.0;          // surface/exp_cos: data-side bandwidth
};

struct OperatorConfig {
  double epsilon = 0.0;          // 0 = use the bandwidth sweep suggestion
  std::string solver = "pinv";   // pinv | eig | cholesky
};

struct ObservationConfig {
  std::string kind = "pointwise";
  int count = 0;                 // J observation sites; 0 = all points
  double sigma = 0.01;           // noise standard deviation
};

struct PriorConfig {
  int k = 2;
  double tau = 0.05;
  double s = 4.0;
};

struct SamplerSection {
  std::string kind = "pcn";      // pcn | gibbs
  long iters = 200000;
  long burnin = 50000;
  int thin = 10;
  double beta = 0.02;
  double tau_step = 0.2;
  bool tune = true;
  double pi0_mean = 2.0;         // gibbs hyperprior N(mean, sd^2) on tau > 0
  double pi0_sd = 1.0;
  double tau0 = 0.0;             // 0 = start at the hyperprior mean
};

struct OutputConfig {
  std::string dir = "out";
  bool write_trace = true;
};

struct ExperimentConfig {
  std::uint64_t seed = 1;
  int chains = 1;
  CloudConfig cloud;
  TruthConfig truth;
  OperatorConfig op;
  ObservationConfig observations;
  PriorConfig prior;
  SamplerSection sampler;
  OutputConfig output;
};

// Strict parsing: unknown keys and type mismatches raise ValidationError.
ExperimentConfig load_config(const std::string& path,
                             const std::vector<std::string>& overrides = {});
ExperimentConfig parse_config(const std::string& json_text,
                              const std::vector<std::string>& overrides = {},
                              const std::string& source = "<string>");

// Full echo with every default materialized; reparsing it reproduces cfg.
std::string config_to_json(const ExperimentConfig& cfg, int indent = 2);

void validate_config(const ExperimentConfig& cfg);

}  // namespace cloudinv
