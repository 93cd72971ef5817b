#include <benchmark/benchmark.h>

#include "cloudinv/experiments.hpp"
#include "cloudinv/forward_solver.hpp"
#include "cloudinv/kernel_operator.hpp"
#include "cloudinv/pointcloud.hpp"
#include "cloudinv/prior.hpp"
#include "cloudinv/rng.hpp"

namespace {

using namespace cloudinv;

void BM_AssembleOperator(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const PointCloud pc = generate_ellipse(n, 3.0);
  const Eigen::VectorXd kappa = Eigen::VectorXd::Constant(n, 2.0);
  for (auto _ : state) {
    DiscreteOperator op = assemble_operator(pc, kappa, 0.01);
    benchmark::DoNotOptimize(op.L.data());
  }
}
BENCHMARK(BM_AssembleOperator)->Arg(100)->Arg(400)->Arg(1000);

void BM_SolveCholesky(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const PointCloud pc = generate_ellipse(n, 3.0);
  const SyntheticTruth truth = ellipse_truth(n, 3.0);
  ForwardEngine engine(pc, 0.01);
  for (auto _ : state) {
    ForwardResult r = engine.solve(truth.kappa_true, truth.f, SolverKind::Cholesky);
    benchmark::DoNotOptimize(r.u.data());
  }
}
BENCHMARK(BM_SolveCholesky)->Arg(100)->Arg(400)->Arg(1000);

void BM_SolvePinv(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const PointCloud pc = generate_ellipse(n, 3.0);
  const SyntheticTruth truth = ellipse_truth(n, 3.0);
  ForwardEngine engine(pc, 0.01);
  for (auto _ : state) {
    ForwardResult r = engine.solve(truth.kappa_true, truth.f, SolverKind::Pinv);
    benchmark::DoNotOptimize(r.u.data());
  }
}
BENCHMARK(BM_SolvePinv)->Arg(100)->Arg(400);

void BM_SelfTuningLaplacian(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const PointCloud pc = generate_ellipse(n, 3.0);
  for (auto _ : state) {
    GraphLaplacian gl = self_tuning_laplacian(pc, 2);
    benchmark::DoNotOptimize(gl.eigvals.data());
  }
}
BENCHMARK(BM_SelfTuningLaplacian)->Arg(100)->Arg(400);

void BM_SamplePrior(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const PointCloud pc = generate_ellipse(n, 3.0);
  auto gl = std::make_shared<const GraphLaplacian>(self_tuning_laplacian(pc, 2));
  const GraphPrior prior = build_prior(gl, 0.05, 4.0);
  Rng rng(1);
  for (auto _ : state) {
    Eigen::VectorXd v = sample_prior(prior, rng);
    benchmark::DoNotOptimize(v.data());
  }
}
BENCHMARK(BM_SamplePrior)->Arg(400)->Arg(1000);

void BM_PcnSweep(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const PointCloud pc = generate_ellipse(n, 3.0);
  const SyntheticTruth truth = ellipse_truth(n, 3.0);
  ForwardEngine engine(pc, 0.01);
  auto gl = std::make_shared<const GraphLaplacian>(self_tuning_laplacian(pc, 2));
  const GraphPrior prior = build_prior(gl, 0.05, 4.0);
  const ObservationMap obs = pointwise_all(n);

  Likelihood lik;
  lik.sigma = 0.01;
  lik.y = observe(obs, truth.u_true, engine.density());
  lik.forward = [&engine, &truth, &obs](const Eigen::VectorXd& theta) {
    return engine.observed_forward(theta, truth.f, obs, SolverKind::Cholesky);
  };

  Rng rng(3);
  ChainState st;
  st.theta = Eigen::VectorXd::Zero(n);
  st.loglik = log_likelihood(lik, st.theta);
  for (auto _ : state) {
    StepResult r = pcn_step(st, 0.02, prior, lik, rng);
    st = r.state;
    benchmark::DoNotOptimize(st.loglik);
  }
}
BENCHMARK(BM_PcnSweep)->Arg(100)->Arg(400);

}  // namespace
