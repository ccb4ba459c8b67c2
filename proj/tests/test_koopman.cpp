#include <doctest.h>

#include <filesystem>
#include <random>

#include "helpers.hpp"
#include "modcomb/koopman.hpp"

using namespace modcomb;
using namespace modcomb::koopman;
namespace fs = std::filesystem;

namespace {

DataSet pairs_from_map(const std::function<double(double)>& f,
                       const std::vector<double>& xs) {
  MatrixXd inputs(static_cast<Eigen::Index>(xs.size()), 1);
  MatrixXd targets(static_cast<Eigen::Index>(xs.size()), 1);
  for (size_t i = 0; i < xs.size(); ++i) {
    inputs(static_cast<Eigen::Index>(i), 0) = xs[i];
    targets(static_cast<Eigen::Index>(i), 0) = f(xs[i]);
  }
  return make_dataset(std::move(inputs), std::move(targets));
}

}  // namespace

TEST_CASE("polynomial dictionary layout") {
  const Dictionary d10 = build_polynomial_dictionary(1, 10);
  CHECK(d10.lifted_dim() == 11);

  const Dictionary d3 = build_polynomial_dictionary(1, 3);
  const VectorXd z = d3.lift(VectorXd::Constant(1, 0.5));
  CHECK(z.size() == 4);
  CHECK(z(0) == 1.0);
  CHECK(z(1) == 0.5);
  CHECK(z(2) == 0.25);
  CHECK(z(3) == 0.125);
  CHECK(d3.extract_state(z)(0) == 0.5);
}

TEST_CASE("state extraction inverts the lift on the state block") {
  const Dictionary dict = build_polynomial_dictionary(1, 5);
  for (double x : {-2.0, -0.3, 0.0, 0.7, 1.9}) {
    const VectorXd z = dict.lift(VectorXd::Constant(1, x));
    CHECK(dict.extract_state(z)(0) == x);
  }
}

TEST_CASE("dictionary fit recovers simple dynamics") {
  const std::vector<double> xs{-2, -1.5, -1, -0.5, 0, 0.5, 1, 1.5, 2};

  SUBCASE("identity map") {
    const DataSet data = pairs_from_map([](double x) { return x; }, xs);
    const auto model =
        fit_koopman(data, build_polynomial_dictionary(1, 3));
    for (double x : xs)
      CHECK(model.predict_state(VectorXd::Constant(1, x))(0) ==
            doctest::Approx(x).epsilon(1e-8));
  }

  SUBCASE("halving map predicts 1.0 at x = 2") {
    const DataSet data = pairs_from_map([](double x) { return 0.5 * x; }, xs);
    const auto model =
        fit_koopman(data, build_polynomial_dictionary(1, 3));
    CHECK(model.predict_state(VectorXd::Constant(1, 2.0))(0) ==
          doctest::Approx(1.0).epsilon(1e-8));
  }

  SUBCASE("cubic map is representable at degree 3 state block") {
    const DataSet data =
        pairs_from_map([](double x) { return x * x * x; }, xs);
    const auto model = fit_koopman(data, build_polynomial_dictionary(1, 3),
                                   Supervision::kStateBlock);
    for (double x : xs)
      CHECK(model.predict_state(VectorXd::Constant(1, x))(0) ==
            doctest::Approx(x * x * x).epsilon(1e-7));
  }
}

TEST_CASE("state-block supervision coincides with direct projection") {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> gauss;
  MatrixXd inputs(40, 1), targets(40, 1);
  for (int i = 0; i < 40; ++i) {
    inputs(i, 0) = gauss(rng);
    targets(i, 0) = gauss(rng);
  }
  const DataSet data = make_dataset(inputs, targets);
  const Dictionary dict = build_polynomial_dictionary(1, 4);
  const auto km = fit_koopman(data, dict, Supervision::kStateBlock);
  const auto pm = fit_projection(data, dict.map);
  for (int i = 0; i < 40; ++i) {
    const VectorXd x = inputs.row(i).transpose();
    CHECK(km.predict_state(x)(0) ==
          doctest::Approx(pm.predict(x)(0)).epsilon(1e-10));
  }
}

TEST_CASE("higher dictionary degree never degrades the training fit") {
  std::mt19937_64 rng(22);
  std::normal_distribution<double> gauss;
  MatrixXd inputs(50, 1), targets(50, 1);
  for (int i = 0; i < 50; ++i) {
    inputs(i, 0) = gauss(rng);
    targets(i, 0) = std::tanh(inputs(i, 0)) + 0.05 * gauss(rng);
  }
  const DataSet data = make_dataset(inputs, targets);
  double prev = std::numeric_limits<double>::infinity();
  for (int degree = 1; degree <= 6; ++degree) {
    const auto model = fit_koopman(
        data, build_polynomial_dictionary(1, degree), Supervision::kStateBlock);
    double err = 0.0;
    for (int i = 0; i < 50; ++i) {
      const VectorXd x = inputs.row(i).transpose();
      err += std::pow(model.predict_state(x)(0) - targets(i, 0), 2);
    }
    CHECK(err <= prev + 1e-9);
    prev = err;
  }
}

TEST_CASE("koopman model JSON round trip") {
  const std::vector<double> xs{-1, -0.5, 0, 0.5, 1};
  const DataSet data = pairs_from_map([](double x) { return 0.5 * x; }, xs);
  const auto model = fit_koopman(data, build_polynomial_dictionary(1, 3));
  const fs::path path =
      fs::temp_directory_path() / "modcomb_test_koopman.json";
  save_koopman_json(model, path.string());
  const auto back = load_koopman_json(path.string());
  CHECK(back.dictionary.family == model.dictionary.family);
  CHECK(back.dictionary.degree == model.dictionary.degree);
  CHECK(back.dictionary.state_dim == model.dictionary.state_dim);
  CHECK((back.op - model.op).cwiseAbs().maxCoeff() < 1e-14);
  for (double x : xs)
    CHECK(back.predict_state(VectorXd::Constant(1, x))(0) ==
          doctest::Approx(model.predict_state(VectorXd::Constant(1, x))(0))
              .epsilon(1e-12));
}

TEST_CASE("rbf dictionary layout keeps the state block") {
  const Dictionary dict = build_rbf_dictionary(1, -1.0, 1.0, 4);
  CHECK(dict.state_dim == 1);
  CHECK(dict.lifted_dim() == 2 + 4);
  const VectorXd x = VectorXd::Constant(1, 0.3);
  const VectorXd z = dict.lift(x);
  CHECK(z(0) == 1.0);
  CHECK(z(1) == doctest::Approx(0.3));
  CHECK(z.tail(4).minCoeff() > 0.0);  // Gaussian bumps are positive
  CHECK((dict.extract_state(z) - x).norm() < 1e-14);
}

TEST_CASE("pointwise dictionary learner shares coefficients") {
  // Targets u_j -> u_j^2 per component; a single shared coefficient set
  // must fit every component at once.
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  MatrixXd inputs(30, 3), targets(30, 3);
  for (int i = 0; i < 30; ++i)
    for (int j = 0; j < 3; ++j) {
      inputs(i, j) = unif(rng);
      targets(i, j) = inputs(i, j) * inputs(i, j);
    }
  const DataSet data = make_dataset(inputs, targets);
  const PointwiseLearner learner = pointwise_dictionary_learner(3, 3);
  const auto model = learner.fit(data, data.targets);
  CHECK((model->evaluate(data) - targets).cwiseAbs().maxCoeff() < 1e-8);
}
