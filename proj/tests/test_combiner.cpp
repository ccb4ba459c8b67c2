#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "helpers.hpp"

using namespace modcomb;
using namespace modcomb::combiner;
namespace fs = std::filesystem;

namespace {

LinearLearner identity_learner() {
  return LinearLearner(linear_map(MatrixXd::Identity(1, 1), "x"));
}

}  // namespace

TEST_CASE("single-pass residual learning on the toy instance") {
  const DataSet data = testing::toy_dataset();
  const LinearLearner g = identity_learner();
  const LinearLearner h(testing::constant_map());
  const auto state = residual_learning(data, h, g);
  CHECK(state.iterations == 1);
  CHECK(state.last().residual_d_norm == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("iteration halves the toy residual each step") {
  const DataSet data = testing::toy_dataset();
  const LinearLearner g = identity_learner();
  const LinearLearner h(testing::constant_map());
  CombinationConfig config;
  config.epsilon = 1e-12;
  config.max_iterations = 10;
  const auto state = iterate(data, g, h, config);
  REQUIRE(state.history.size() == 10);
  for (const auto& rec : state.history)
    CHECK(rec.residual_d_norm ==
          doctest::Approx(std::pow(0.5, rec.n + 1)).epsilon(1e-8));
  CHECK(state.last().residual_d_norm < 1e-3);
}

TEST_CASE("optimal relaxation parameter examples") {
  MatrixXd inputs(2, 1), targets(2, 1);
  inputs << 0.0, 1.0;
  targets << 0.0, 0.0;
  const DataSet data = make_dataset(inputs, targets);
  const InnerProductContext ctx(data);

  MatrixXd r_prev(2, 1), r_curr(2, 1);
  r_prev << 1.0, 1.0;

  SUBCASE("halved residual gives t = 2") {
    r_curr = 0.5 * r_prev;
    CHECK(compute_t_f(r_prev, r_curr, ctx) == doctest::Approx(2.0));
  }
  SUBCASE("vanished residual gives t = 1") {
    r_curr.setZero();
    CHECK(compute_t_f(r_prev, r_curr, ctx) == doctest::Approx(1.0));
  }
  SUBCASE("orthogonal equal-norm residuals give t = 1/2") {
    r_prev << 1.0, 0.0;
    r_curr << 0.0, 1.0;
    CHECK(compute_t_f(r_prev, r_curr, ctx) == doctest::Approx(0.5));
  }
  SUBCASE("stagnant residual is rejected") {
    r_curr = r_prev;
    CHECK_THROWS_WITH_AS(compute_t_f(r_prev, r_curr, ctx),
                         "stagnant residual", Error);
  }
}

TEST_CASE("relaxation parameter minimizes the blended residual norm") {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> gauss;
  MatrixXd inputs(6, 1), targets(6, 1);
  for (int i = 0; i < 6; ++i) {
    inputs(i, 0) = gauss(rng);
    targets(i, 0) = 0.0;
  }
  const DataSet data = make_dataset(inputs, targets);
  const InnerProductContext ctx(data);
  std::uniform_real_distribution<double> unif(-5.0, 5.0);
  for (int rep = 0; rep < 20; ++rep) {
    MatrixXd r_prev(6, 1), r_curr(6, 1);
    for (int i = 0; i < 6; ++i) {
      r_prev(i, 0) = gauss(rng);
      r_curr(i, 0) = gauss(rng);
    }
    const double t_star = compute_t_f(r_prev, r_curr, ctx);
    const double best = ctx.norm(r_prev + t_star * (r_curr - r_prev));
    for (int k = 0; k < 100; ++k) {
      const double t = unif(rng);
      CHECK(ctx.norm(r_prev + t * (r_curr - r_prev)) >= best - 1e-12);
    }
  }
}

TEST_CASE("iteration matches explicit alternating projections") {
  std::mt19937_64 rng(32);
  for (int rep = 0; rep < 10; ++rep) {
    const auto inst = testing::random_instance(rng, 40, 6, 2, 2, false);
    const InnerProductContext ctx(inst.data);

    std::vector<MatrixXd> feats_g, feats_h;
    const MatrixXd phi_g = inst.map_g.evaluate_rows(inst.data.inputs);
    const MatrixXd phi_h = inst.map_h.evaluate_rows(inst.data.inputs);
    for (Eigen::Index j = 0; j < phi_g.cols(); ++j)
      feats_g.push_back(phi_g.col(j));
    for (Eigen::Index j = 0; j < phi_h.cols(); ++j)
      feats_h.push_back(phi_h.col(j));
    const auto basis_g = diag::orthonormalize(feats_g, ctx);
    const auto basis_h = diag::orthonormalize(feats_h, ctx);

    CombinationConfig config;
    config.epsilon = 1e-14;
    config.max_iterations = 8;
    const auto state =
        iterate(inst.data, LinearLearner(inst.map_g),
                LinearLearner(inst.map_h), config);

    const Eigen::Index n_samples = inst.data.size();
    MatrixXd r = diag::flatten_scaled(inst.data.targets, n_samples);
    const double scale = r.norm();
    for (const auto& rec : state.history) {
      // Residual after record n equals n + 1 rounds of removing first the
      // second-space component, then the first-space component.
      r -= basis_h.project(r);
      r -= basis_g.project(r);
      CHECK(std::abs(r.norm() - rec.residual_d_norm) <= 1e-8 * scale);
    }
  }
}

TEST_CASE("residual norms never increase along the iteration") {
  std::mt19937_64 rng(33);
  for (int rep = 0; rep < 20; ++rep) {
    const auto inst = testing::random_instance(rng, 30, 5, 2, 2, rep % 2 == 0);
    CombinationConfig config;
    config.epsilon = 1e-12;
    config.max_iterations = 30;
    const auto state =
        iterate(inst.data, LinearLearner(inst.map_g),
                LinearLearner(inst.map_h), config);
    const InnerProductContext ctx(inst.data);
    const double scale = ctx.norm(inst.data.targets);
    for (size_t i = 1; i < state.history.size(); ++i)
      CHECK(state.history[i].residual_d_norm <=
            state.history[i - 1].residual_d_norm + 1e-10 * scale);
  }
}

TEST_CASE("acceleration converges in one relaxed step on 1-D spaces") {
  // With one-dimensional component spaces and a representable target, the
  // first and second plain residuals are collinear, so the optimal
  // relaxation removes the whole residual at once.
  std::mt19937_64 rng(34);
  for (int rep = 0; rep < 25; ++rep) {
    const auto inst = testing::random_instance(rng, 25, 4, 1, 1, true);
    const InnerProductContext ctx(inst.data);
    const double scale = ctx.norm(inst.data.targets);
    CombinationConfig config;
    config.epsilon = 1e-10;
    config.max_iterations = 20;
    config.accelerate = true;
    const auto state =
        iterate_accelerated(inst.data, LinearLearner(inst.map_g),
                            LinearLearner(inst.map_h), config);
    bool accelerated = false;
    for (const auto& rec : state.history) {
      if (std::isfinite(rec.t_f)) {
        CHECK(rec.residual_d_norm <= 1e-8 * scale);
        accelerated = true;
        break;
      }
    }
    if (!accelerated)  // converged before any relaxation was needed
      CHECK(state.last().residual_d_norm <= 1e-8 * scale);
  }
}

TEST_CASE("iteration is at least as accurate as single-pass learning") {
  std::mt19937_64 rng(35);
  for (int rep = 0; rep < 10; ++rep) {
    const auto inst = testing::random_instance(rng, 30, 5, 2, 2, false);
    const LinearLearner g(inst.map_g);
    const LinearLearner h(inst.map_h);
    const auto single = residual_learning(inst.data, h, g);
    CombinationConfig config;
    config.epsilon = 1e-12;
    config.max_iterations = 25;
    const auto iterated = iterate(inst.data, g, h, config);
    CHECK(iterated.history.front().residual_d_norm ==
          doctest::Approx(single.last().residual_d_norm).epsilon(1e-10));
    CHECK(iterated.last().residual_d_norm <=
          single.last().residual_d_norm + 1e-12);
  }
}

TEST_CASE("stopping decisions") {
  const DataSet data = testing::toy_dataset();
  const LinearLearner g = identity_learner();
  const LinearLearner h(testing::constant_map());

  CombinationConfig config;
  config.epsilon = 1e-3;
  config.max_iterations = 40;
  const auto state = iterate(data, g, h, config);
  CHECK(state.stopped_by_criterion);
  const auto decision = check_stopping(state, data, config);
  CHECK(decision.stop);
  CHECK(decision.value < 1e-3);

  // The successive-difference criterion is undefined before a second
  // record exists.
  CombinationConfig diff_config;
  diff_config.criterion = StoppingCriterion::kSuccessiveDifference;
  const auto one = residual_learning(data, h, g);
  CHECK_THROWS_AS(check_stopping(one, data, diff_config), Error);

  CombinationConfig run_diff = diff_config;
  run_diff.epsilon = 1e-3;
  run_diff.max_iterations = 40;
  const auto diff_state = iterate(data, g, h, run_diff);
  CHECK(diff_state.history.size() >= 2);
  CHECK(check_stopping(diff_state, data, run_diff).stop);
}

TEST_CASE("history CSV export") {
  const DataSet data = testing::toy_dataset();
  CombinationConfig config;
  config.epsilon = 1e-6;
  config.max_iterations = 10;
  const auto state = iterate(data, identity_learner(),
                             LinearLearner(testing::constant_map()), config);
  const fs::path path =
      fs::temp_directory_path() / "modcomb_test_history.csv";
  save_history_csv(state, path.string());
  std::ifstream in(path.string());
  std::string header;
  std::getline(in, header);
  CHECK(header == "n,residual_norm,successive_difference,t_F");
  int lines = 0;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) ++lines;
  CHECK(lines == static_cast<int>(state.history.size()));
}

TEST_CASE("combined model predictions are the sum of the parts") {
  std::mt19937_64 rng(36);
  const auto inst = testing::random_instance(rng, 20, 4, 2, 2, true);
  CombinationConfig config;
  config.epsilon = 1e-10;
  config.max_iterations = 50;
  const auto state = iterate(inst.data, LinearLearner(inst.map_g),
                             LinearLearner(inst.map_h), config);
  const auto combined = state.combined();
  for (int i = 0; i < 5; ++i) {
    const VectorXd x = inst.data.inputs.row(i).transpose();
    const VectorXd sum =
        state.model_first->predict(x) + state.model_second->predict(x);
    CHECK((combined->predict(x) - sum).norm() < 1e-14);
  }
}
