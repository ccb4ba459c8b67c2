#include <benchmark/benchmark.h>

#include <random>

#include "modcomb/combiner.hpp"
#include "modcomb/koopman.hpp"
#include "modcomb/mpc.hpp"
#include "modcomb/systems.hpp"

using namespace modcomb;

namespace {

DataSet random_scalar_dataset(Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  MatrixXd x(n, 1), y(n, 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    x(i, 0) = dist(rng);
    y(i, 0) = std::sin(x(i, 0)) + 0.1 * dist(rng);
  }
  return make_dataset(std::move(x), std::move(y));
}

void bm_fit_projection(benchmark::State& state) {
  const auto data = random_scalar_dataset(state.range(0), 7);
  const auto map = polynomial_map(10);
  for (auto _ : state) {
    auto model = fit_projection(data, map);
    benchmark::DoNotOptimize(model.coefficients);
  }
}
BENCHMARK(bm_fit_projection)->Arg(256)->Arg(2048);

void bm_combiner_iterate(benchmark::State& state) {
  systems::Grid1D grid{20, 1e-3};
  const auto traj = systems::generate_rd_trajectories(
      grid, 1.0, 0.25, 50, 10, systems::InitialLaw::kStandardNormal, 11);
  const auto data = systems::generate_dataset(traj);
  PointwiseLearner g(second_difference_map(grid.interior(), grid.dz()));
  PointwiseLearner h = koopman::pointwise_dictionary_learner(
      grid.interior(), 10);
  combiner::CombinationConfig cfg;
  cfg.max_iterations = 10;
  cfg.epsilon = 1e-14;
  for (auto _ : state) {
    auto result = combiner::iterate(data, g, h, cfg);
    benchmark::DoNotOptimize(result.iterations);
  }
}
BENCHMARK(bm_combiner_iterate);

void bm_horizon_qp(benchmark::State& state) {
  const auto dict = koopman::build_polynomial_dictionary(2, 12);
  const Eigen::Index p = dict.lifted_dim();
  systems::ControlledOscillator osc;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ux(-1.0, 1.0);
  MatrixXd xs(200, 2), ys(200, 2), cs(200, 1), es(200, 1);
  for (int i = 0; i < 200; ++i) {
    VectorXd x(2), c(1), e(1);
    x << ux(rng), ux(rng);
    c << ux(rng);
    e << 2.0 * ux(rng);
    xs.row(i) = x.transpose();
    cs.row(i) = c.transpose();
    es.row(i) = e.transpose();
    ys.row(i) = osc.step(x, c, e).transpose();
  }
  const auto data = make_dataset(xs, ys, cs, es);
  mpc::PredictorSpec spec;
  spec.structure = mpc::Structure::kHybrid1;
  spec.dictionary = dict;
  spec.external_basis = mpc::default_external_basis();
  spec.joint_basis = mpc::default_joint_basis(1);
  spec.combiner_config.max_iterations = 20;
  const auto pred = mpc::fit_predictor(spec, data);

  mpc::MPCProblem problem;
  problem.horizon = 5;
  problem.q = MatrixXd::Zero(p, p);
  problem.q(1, 1) = problem.q(2, 2) = 1.0;
  problem.r = MatrixXd::Constant(1, 1, 0.1);
  problem.lower = VectorXd::Constant(1, -2.0);
  problem.upper = VectorXd::Constant(1, 2.0);
  problem.z_ref = MatrixXd::Zero(10, p);
  problem.z_ref.col(0).setOnes();
  problem.z_ref.col(1).setConstant(0.3);
  problem.external_forecast = MatrixXd::Zero(10, 1);
  const VectorXd z0 = dict.lift((VectorXd(2) << 0.5, -0.2).finished());

  for (auto _ : state) {
    auto sol = mpc::solve_horizon(pred, problem, z0, 0);
    benchmark::DoNotOptimize(sol.cost);
  }
}
BENCHMARK(bm_horizon_qp);

}  // namespace

BENCHMARK_MAIN();
