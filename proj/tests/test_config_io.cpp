#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include <doctest.h>
#include <json.hpp>

#include "cloudinv/config.hpp"
#include "cloudinv/errors.hpp"
#include "cloudinv/io.hpp"
#include "cloudinv/mcmc.hpp"
#include "cloudinv/pointcloud.hpp"
#include "cloudinv/rng.hpp"

using namespace cloudinv;

TEST_CASE("parse_config materializes defaults") {
  const ExperimentConfig cfg = parse_config("{}", {}, "inline");
  CHECK(cfg.seed == 1);
  CHECK(cfg.chains == 1);
  CHECK(cfg.cloud.kind == "ellipse");
  CHECK(cfg.cloud.n == 400);
  CHECK(cfg.cloud.a == 3.0);
  CHECK(cfg.truth.kind == "ellipse");
  CHECK(cfg.op.solver == "pinv");
  CHECK(cfg.observations.kind == "pointwise");
  CHECK(cfg.observations.sigma == 0.01);
  CHECK(cfg.prior.k == 2);
  CHECK(cfg.prior.tau == 0.05);
  CHECK(cfg.prior.s == 4.0);
  CHECK(cfg.sampler.kind == "pcn");
  CHECK(cfg.sampler.iters == 200000);
  CHECK(cfg.output.dir == "out");
  CHECK(cfg.output.write_trace);
}

TEST_CASE("parse_config rejects unknown keys everywhere") {
  CHECK_THROWS_AS(parse_config(R"({"bogus": 1})", {}, "inline"), ValidationError);
  CHECK_THROWS_AS(parse_config(R"({"cloud": {"bogus": 1}})", {}, "inline"),
                  ValidationError);
  CHECK_THROWS_AS(parse_config(R"({"truth": {"bogus": 1}})", {}, "inline"),
                  ValidationError);
  CHECK_THROWS_AS(parse_config(R"({"operator": {"bogus": 1}})", {}, "inline"),
                  ValidationError);
  CHECK_THROWS_AS(parse_config(R"({"observations": {"bogus": 1}})", {}, "inline"),
                  ValidationError);
  CHECK_THROWS_AS(parse_config(R"({"prior": {"bogus": 1}})", {}, "inline"),
                  ValidationError);
  CHECK_THROWS_AS(parse_config(R"({"sampler": {"bogus": 1}})", {}, "inline"),
                  ValidationError);
  CHECK_THROWS_AS(parse_config(R"({"output": {"bogus": 1}})", {}, "inline"),
                  ValidationError);
}

TEST_CASE("parse_config rejects malformed documents with the source name") {
  try {
    parse_config("{not json", {}, "somefile.json");
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("somefile.json") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config(R"({"cloud": {"n": "forty"}})", {}, "inline"),
                  ValidationError);
}

TEST_CASE("overrides apply after the file and support dotted paths") {
  const ExperimentConfig cfg = parse_config(
      R"({"sampler": {"iters": 5000, "burnin": 400}})",
      {"sampler.iters=1000", "seed=7", "output.dir=/tmp/over", "cloud.subsample=10",
       "sampler.tune=false", "observations.sigma=0.2"},
      "inline");
  CHECK(cfg.sampler.iters == 1000);  // override wins over the file
  CHECK(cfg.seed == 7);
  CHECK(cfg.output.dir == "/tmp/over");  // bare string value
  CHECK(cfg.cloud.subsample == 10);
  CHECK(!cfg.sampler.tune);
  CHECK(cfg.observations.sigma == 0.2);

  CHECK_THROWS_AS(parse_config("{}", {"no_equals"}, "inline"), ValidationError);
  CHECK_THROWS_AS(parse_config("{}", {"bogus.key=1"}, "inline"), ValidationError);
  CHECK_THROWS_AS(parse_config("{}", {"=5"}, "inline"), ValidationError);
}

TEST_CASE("load_config names a missing path") {
  try {
    load_config("/nonexistent/cfg.json", {});
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("/nonexistent/cfg.json") != std::string::npos);
  }
}

TEST_CASE("validate_config cross-field rules") {
  auto base = []() {
    return parse_config("{}", {}, "inline");
  };

  ExperimentConfig c1 = base();
  c1.truth.kind = "torus";
  CHECK_THROWS_AS(validate_config(c1), ValidationError);  // torus truth, ellipse cloud

  ExperimentConfig c2 = base();
  c2.cloud.kind = "torus";
  c2.truth.kind = "ellipse";
  CHECK_THROWS_AS(validate_config(c2), ValidationError);

  ExperimentConfig c3 = base();
  c3.truth.kind = "exp_cos";
  c3.truth.epsilon = 0.0;
  CHECK_THROWS_AS(validate_config(c3), ValidationError);  // needs a truth bandwidth
  c3.truth.epsilon = 0.01;
  CHECK_NOTHROW(validate_config(c3));

  ExperimentConfig c4 = base();
  c4.truth.kind = "surface";
  CHECK_THROWS_AS(validate_config(c4), ValidationError);  // needs external cloud
  c4.cloud.kind = "external";
  c4.cloud.path = "some.csv";
  c4.cloud.d = 3;
  c4.cloud.m = 2;
  c4.truth.epsilon = 0.1;
  CHECK_NOTHROW(validate_config(c4));

  ExperimentConfig c5 = base();
  c5.sampler.beta = 1.5;
  CHECK_THROWS_AS(validate_config(c5), ValidationError);
  c5.sampler.beta = 0.5;
  c5.sampler.burnin = c5.sampler.iters + 1;
  CHECK_THROWS_AS(validate_config(c5), ValidationError);

  ExperimentConfig c6 = base();
  c6.op.solver = "qr";
  CHECK_THROWS_AS(validate_config(c6), ValidationError);

  ExperimentConfig c7 = base();
  c7.prior.tau = 0.0;
  CHECK_THROWS_AS(validate_config(c7), ValidationError);
}

TEST_CASE("config survives a JSON round trip") {
  const ExperimentConfig cfg = parse_config(
      R"({"seed": 9, "cloud": {"kind": "torus", "n1": 12, "n2": 14},
          "truth": {"kind": "torus"}, "operator": {"epsilon": 0.21, "solver": "eig"},
          "prior": {"k": 16, "tau": 0.08, "s": 6.0},
          "sampler": {"iters": 777, "burnin": 77, "beta": 0.11}})",
      {}, "inline");
  const std::string echoed = config_to_json(cfg);
  const ExperimentConfig back = parse_config(echoed, {}, "echo");
  CHECK(nlohmann::json::parse(config_to_json(back)) == nlohmann::json::parse(echoed));
  CHECK(back.cloud.n1 == 12);
  CHECK(back.op.solver == "eig");
  CHECK(back.sampler.beta == 0.11);
}

TEST_CASE("format_double survives a string round trip") {
  for (double v : {0.1, 1.0 / 3.0, 2.5e-17, 1e300, -0.0, 12345.6789,
                   std::numeric_limits<double>::denorm_min(),
                   std::numeric_limits<double>::max(), 0.05, 3.0}) {
    const std::string s = format_double(v);
    CHECK(std::strtod(s.c_str(), nullptr) == v);
  }
}

TEST_CASE("point cloud CSV writes load back bitwise") {
  const PointCloud pc = generate_torus(6, 5);
  const std::string path = "/tmp/cloudinv_test_pc_roundtrip.csv";
  {
    std::ofstream os(path);
    write_pointcloud_csv(os, pc);
  }
  const PointCloud back = load_pointcloud(path, 3, 2);
  REQUIRE(back.n == pc.n);
  CHECK((back.points - pc.points).cwiseAbs().maxCoeff() == 0.0);
  std::remove(path.c_str());
}

TEST_CASE("trace CSV round trip preserves samples bitwise") {
  ChainTrace tr;
  Rng rng(64);
  tr.samples.resize(7, 4);
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 4; ++j) tr.samples(i, j) = rng.normal() * 100.0;
  tr.sample_loglik = rng.normals(7);
  for (int i = 0; i < 7; ++i) tr.sample_iters.push_back(10 * i);
  tr.hierarchical = false;

  const std::string path = "/tmp/cloudinv_test_trace_roundtrip.csv";
  write_trace_csv(path, tr);
  const ChainTrace back = read_trace_csv(path);
  REQUIRE(back.samples.rows() == 7);
  REQUIRE(back.samples.cols() == 4);
  CHECK((back.samples - tr.samples).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.sample_loglik - tr.sample_loglik).cwiseAbs().maxCoeff() == 0.0);
  CHECK(back.sample_iters == tr.sample_iters);
  CHECK(!back.hierarchical);

  // Hierarchical traces carry tau; detection comes from the column content.
  tr.hierarchical = true;
  tr.sample_tau = rng.normals(7).cwiseAbs();
  write_trace_csv(path, tr);
  const ChainTrace hback = read_trace_csv(path);
  CHECK(hback.hierarchical);
  CHECK((hback.sample_tau - tr.sample_tau).cwiseAbs().maxCoeff() == 0.0);
  std::remove(path.c_str());
}

TEST_CASE("trace CSV rejects corrupt headers and rows") {
  const std::string path = "/tmp/cloudinv_test_trace_bad.csv";
  {
    std::ofstream os(path);
    os << "iteration,loglik,theta_1\n0,-1.0,0.5\n";  // missing tau column
  }
  CHECK_THROWS_AS(read_trace_csv(path), ValidationError);
  {
    std::ofstream os(path);
    os << "iteration,loglik,tau,theta_1\n0,-1.0,,0.5\n1,-1.0,oops,0.5\n";
  }
  CHECK_THROWS_AS(read_trace_csv(path), ValidationError);
  CHECK_THROWS_AS(read_trace_csv("/nonexistent/trace.csv"), ValidationError);
  std::remove(path.c_str());
}

TEST_CASE("bandwidth table format") {
  BandwidthScan scan;
  scan.table = {{0.5, 100.0, 0.25}, {1.0, 200.0, 0.5}};
  scan.suggested = 1.0;
  std::ostringstream os;
  write_bandwidth_csv(os, scan);
  CHECK(os.str() == "epsilon,T,slope\n0.5,100,0.25\n1,200,0.5\n");
}
