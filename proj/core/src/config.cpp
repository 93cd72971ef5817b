#include "cloudinv/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace cloudinv {

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::string& section,
                const std::set<std::string>& allowed) {
  if (!j.is_object())
    throw ValidationError("config: section '" + section + "' must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key))
      throw ValidationError("config: unknown key '" +
                            (section.empty() ? key : section + "." + key) + "'");
  }
}

template <typename T>
void get_to(const json& j, const std::string& section, const std::string& key, T& out) {
  const auto it = j.find(key);
  if (it == j.end()) return;
  try {
    it->get_to(out);
  } catch (const json::exception&) {
    throw ValidationError("config: bad value for '" +
                          (section.empty() ? key : section + "." + key) + "'");
  }
}

ExperimentConfig from_json(const json& j) {
  check_keys(j, "", {"seed", "chains", "cloud", "truth", "operator", "observations",
                     "prior", "sampler", "output"});
  ExperimentConfig cfg;
  get_to(j, "", "seed", cfg.seed);
  get_to(j, "", "chains", cfg.chains);

  if (j.contains("cloud")) {
    const json& c = j.at("cloud");
    check_keys(c, "cloud", {"kind", "n", "a", "n1", "n2", "path", "d", "m", "subsample"});
    get_to(c, "cloud", "kind", cfg.cloud.kind);
    get_to(c, "cloud", "n", cfg.cloud.n);
    get_to(c, "cloud", "a", cfg.cloud.a);
    get_to(c, "cloud", "n1", cfg.cloud.n1);
    get_to(c, "cloud", "n2", cfg.cloud.n2);
    get_to(c, "cloud", "path", cfg.cloud.path);
    get_to(c, "cloud", "d", cfg.cloud.d);
    get_to(c, "cloud", "m", cfg.cloud.m);
    get_to(c, "cloud", "subsample", cfg.cloud.subsample);
  }
  if (j.contains("truth")) {
    const json& c = j.at("truth");
    check_keys(c, "truth", {"kind", "freq", "fine_factor", "tau", "s", "k", "epsilon"});
    get_to(c, "truth", "kind", cfg.truth.kind);
    get_to(c, "truth", "freq", cfg.truth.freq);
    get_to(c, "truth", "fine_factor", cfg.truth.fine_factor);
    get_to(c, "truth", "tau", cfg.truth.tau);
    get_to(c, "truth", "s", cfg.truth.s);
    get_to(c, "truth", "k", cfg.truth.k);
    get_to(c, "truth", "epsilon", cfg.truth.epsilon);
  }
  if (j.contains("operator")) {
    const json& c = j.at("operator");
    check_keys(c, "operator", {"epsilon", "solver"});
    get_to(c, "operator", "epsilon", cfg.op.epsilon);
    get_to(c, "operator", "solver", cfg.op.solver);
  }
  if (j.contains("observations")) {
    const json& c = j.at("observations");
    check_keys(c, "observations", {"kind", "count", "sigma"});
    get_to(c, "observations", "kind", cfg.observations.kind);
    get_to(c, "observations", "count", cfg.observations.count);
    get_to(c, "observations", "sigma", cfg.observations.sigma);
  }
  if (j.contains("prior")) {
    const json& c = j.at("prior");
    check_keys(c, "prior", {"k", "tau", "s"});
    get_to(c, "prior", "k", cfg.prior.k);
    get_to(c, "prior", "tau", cfg.prior.tau);
    get_to(c, "prior", "s", cfg.prior.s);
  }
  if (j.contains("sampler")) {
    const json& c = j.at("sampler");
    check_keys(c, "sampler", {"kind", "iters", "burnin", "thin", "beta", "tau_step",
                              "tune", "pi0_mean", "pi0_sd", "tau0"});
    get_to(c, "sampler", "kind", cfg.sampler.kind);
    get_to(c, "sampler", "iters", cfg.sampler.iters);
    get_to(c, "sampler", "burnin", cfg.sampler.burnin);
    get_to(c, "sampler", "thin", cfg.sampler.thin);
    get_to(c, "sampler", "beta", cfg.sampler.beta);
    get_to(c, "sampler", "tau_step", cfg.sampler.tau_step);
    get_to(c, "sampler", "tune", cfg.sampler.tune);
    get_to(c, "sampler", "pi0_mean", cfg.sampler.pi0_mean);
    get_to(c, "sampler", "pi0_sd", cfg.sampler.pi0_sd);
    get_to(c, "sampler", "tau0", cfg.sampler.tau0);
  }
  if (j.contains("output")) {
    const json& c = j.at("output");
    check_keys(c, "output", {"dir", "write_trace"});
    get_to(c, "output", "dir", cfg.output.dir);
    get_to(c, "output", "write_trace", cfg.output.write_trace);
  }
  return cfg;
}

json to_json(const ExperimentConfig& cfg) {
  json j;
  j["seed"] = cfg.seed;
  j["chains"] = cfg.chains;
  j["cloud"] = {{"kind", cfg.cloud.kind},   {"n", cfg.cloud.n},
                {"a", cfg.cloud.a},         {"n1", cfg.cloud.n1},
                {"n2", cfg.cloud.n2},       {"path", cfg.cloud.path},
                {"d", cfg.cloud.d},         {"m", cfg.cloud.m},
                {"subsample", cfg.cloud.subsample}};
  j["truth"] = {{"kind", cfg.truth.kind},
                {"freq", cfg.truth.freq},
                {"fine_factor", cfg.truth.fine_factor},
                {"tau", cfg.truth.tau},
                {"s", cfg.truth.s},
                {"k", cfg.truth.k},
                {"epsilon", cfg.truth.epsilon}};
  j["operator"] = {{"epsilon", cfg.op.epsilon}, {"solver", cfg.op.solver}};
  j["observations"] = {{"kind", cfg.observations.kind},
                       {"count", cfg.observations.count},
                       {"sigma", cfg.observations.sigma}};
  j["prior"] = {{"k", cfg.prior.k}, {"tau", cfg.prior.tau}, {"s", cfg.prior.s}};
  j["sampler"] = {{"kind", cfg.sampler.kind},
                  {"iters", cfg.sampler.iters},
                  {"burnin", cfg.sampler.burnin},
                  {"thin", cfg.sampler.thin},
                  {"beta", cfg.sampler.beta},
                  {"tau_step", cfg.sampler.tau_step},
                  {"tune", cfg.sampler.tune},
                  {"pi0_mean", cfg.sampler.pi0_mean},
                  {"pi0_sd", cfg.sampler.pi0_sd},
                  {"tau0", cfg.sampler.tau0}};
  j["output"] = {{"dir", cfg.output.dir}, {"write_trace", cfg.output.write_trace}};
  return j;
}

void apply_override(json& j, const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ValidationError("override '" + spec + "' is not of the form key=value");
  const std::string key = spec.substr(0, eq);
  const std::string value = spec.substr(eq + 1);

  json* node = &j;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? dot : dot - start);
    if (part.empty()) throw ValidationError("override '" + spec + "' has an empty key part");
    if (dot == std::string::npos) {
      json parsed;
      try {
        parsed = json::parse(value);
      } catch (const json::exception&) {
        parsed = value;  // bare strings are allowed unquoted
      }
      (*node)[part] = parsed;
      return;
    }
    node = &(*node)[part];
    start = dot + 1;
  }
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text,
                              const std::vector<std::string>& overrides,
                              const std::string& source) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ValidationError("config: cannot parse " + source + ": " + e.what());
  }
  for (const auto& ov : overrides) apply_override(j, ov);
  ExperimentConfig cfg = from_json(j);
  validate_config(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::string& path,
                             const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config: cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), overrides, "'" + path + "'");
}

std::string config_to_json(const ExperimentConfig& cfg, int indent) {
  return to_json(cfg).dump(indent);
}

void validate_config(const ExperimentConfig& cfg) {
  auto fail = [](const std::string& msg) { throw ValidationError("config: " + msg); };

  if (cfg.chains < 1) fail("chains must be >= 1");

  const std::string& ck = cfg.cloud.kind;
  if (ck != "ellipse" && ck != "torus" && ck != "external")
    fail("cloud.kind must be ellipse, torus, or external");
  if (ck == "ellipse") {
    if (cfg.cloud.n < 2) fail("cloud.n must be >= 2");
    if (!(cfg.cloud.a > 0.0)) fail("cloud.a must be positive");
  } else if (ck == "torus") {
    if (cfg.cloud.n1 < 2 || cfg.cloud.n2 < 2) fail("cloud.n1 and cloud.n2 must be >= 2");
  } else {
    if (cfg.cloud.path.empty()) fail("cloud.path is required for external clouds");
    if (cfg.cloud.m < 1 || cfg.cloud.d < cfg.cloud.m) fail("need cloud.d >= cloud.m >= 1");
  }
  if (cfg.cloud.subsample != 0 && cfg.cloud.subsample < 2)
    fail("cloud.subsample must be 0 or >= 2");

  const std::string& tk = cfg.truth.kind;
  if (tk != "ellipse" && tk != "torus" && tk != "surface" && tk != "exp_cos")
    fail("truth.kind must be ellipse, torus, surface, or exp_cos");
  if (tk == "ellipse" && ck != "ellipse") fail("truth.kind ellipse needs an ellipse cloud");
  if (tk == "torus" && ck != "torus") fail("truth.kind torus needs a torus cloud");
  if (tk == "exp_cos" && ck != "ellipse") fail("truth.kind exp_cos needs an ellipse cloud");
  if (tk == "surface") {
    if (ck != "external") fail("truth.kind surface needs an external cloud");
    if (!(cfg.truth.tau > 0.0) || !(cfg.truth.s > 0.0)) fail("truth.tau and truth.s must be positive");
    if (cfg.truth.k < 1) fail("truth.k must be >= 1");
    if (!(cfg.truth.epsilon > 0.0)) fail("truth.epsilon must be positive for surface truths");
  }
  if (tk == "exp_cos") {
    if (cfg.truth.freq < 1) fail("truth.freq must be >= 1");
    if (cfg.truth.fine_factor < 2) fail("truth.fine_factor must be >= 2");
    if (!(cfg.truth.epsilon > 0.0)) fail("truth.epsilon must be positive for exp_cos truths");
  }

  if (cfg.op.epsilon < 0.0) fail("operator.epsilon must be >= 0");
  if (cfg.op.solver != "pinv" && cfg.op.solver != "eig" && cfg.op.solver != "cholesky")
    fail("operator.solver must be pinv, eig, or cholesky");

  if (cfg.observations.kind != "pointwise") fail("observations.kind must be pointwise");
  if (cfg.observations.count < 0) fail("observations.count must be >= 0");
  if (cfg.observations.sigma < 0.0) fail("observations.sigma must be >= 0");

  if (cfg.prior.k < 1) fail("prior.k must be >= 1");
  if (!(cfg.prior.tau > 0.0)) fail("prior.tau must be positive");
  if (!(cfg.prior.s > 0.0)) fail("prior.s must be positive");

  const std::string& sk = cfg.sampler.kind;
  if (sk != "pcn" && sk != "gibbs") fail("sampler.kind must be pcn or gibbs");
  if (cfg.sampler.iters < cfg.sampler.burnin || cfg.sampler.burnin < 0)
    fail("sampler needs iters >= burnin >= 0");
  if (cfg.sampler.thin < 1) fail("sampler.thin must be >= 1");
  if (!(cfg.sampler.beta > 0.0 && cfg.sampler.beta < 1.0))
    fail("sampler.beta must lie in (0,1)");
  if (!(cfg.sampler.tau_step > 0.0)) fail("sampler.tau_step must be positive");
  if (!(cfg.sampler.pi0_sd > 0.0)) fail("sampler.pi0_sd must be positive");
  if (cfg.sampler.tau0 < 0.0) fail("sampler.tau0 must be >= 0");

  if (cfg.output.dir.empty()) fail("output.dir must not be empty");
}

}  // namespace cloudinv
