#include <doctest.h>

#include <Eigen/SVD>
#include <filesystem>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "helpers.hpp"

using namespace modcomb;
using namespace modcomb::diag;
namespace fs = std::filesystem;

namespace {

DataSet grid_dataset(std::initializer_list<double> xs) {
  MatrixXd inputs(static_cast<Eigen::Index>(xs.size()), 1);
  Eigen::Index i = 0;
  for (double x : xs) inputs(i++, 0) = x;
  MatrixXd targets = MatrixXd::Zero(inputs.rows(), 1);
  return make_dataset(std::move(inputs), std::move(targets));
}

SubspaceBasis basis_from_columns(const MatrixXd& cols,
                                 const InnerProductContext& ctx) {
  std::vector<MatrixXd> feats;
  for (Eigen::Index j = 0; j < cols.cols(); ++j) feats.push_back(cols.col(j));
  return orthonormalize(feats, ctx);
}

}  // namespace

TEST_CASE("orthonormalization detects rank") {
  const DataSet data = grid_dataset({-1.0, 0.0, 1.0});
  const InnerProductContext ctx(data);

  MatrixXd x = data.inputs;
  MatrixXd x2 = data.inputs.array().square();

  SUBCASE("independent features keep full rank") {
    const auto basis = basis_from_columns((MatrixXd(3, 2) << x, x2).finished(),
                                          ctx);
    CHECK(basis.rank == 2);
    const MatrixXd gram = basis.q.transpose() * basis.q;
    CHECK((gram - MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
  }

  SUBCASE("duplicates collapse to rank one") {
    const auto basis =
        basis_from_columns((MatrixXd(3, 3) << x, x, 2.0 * x).finished(), ctx);
    CHECK(basis.rank == 1);
  }

  SUBCASE("zero feature contributes nothing") {
    const auto basis = basis_from_columns(
        (MatrixXd(3, 2) << x, MatrixXd::Zero(3, 1)).finished(), ctx);
    CHECK(basis.rank == 1);
  }
}

TEST_CASE("minimum angle on the toy instance") {
  const DataSet data = testing::toy_dataset();
  const InnerProductContext ctx(data);
  MatrixXd g(2, 1), h(2, 1);
  g << 1.0, 0.0;  // identity feature evaluated at x = 1, 0
  h << 1.0, 1.0;  // constant feature
  const auto report = min_angle(basis_from_columns(g, ctx),
                                basis_from_columns(h, ctx));
  CHECK(report.c0 == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(report.c == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(report.intersection_dimension == 0);
  CHECK(report.rate_per_iteration() == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("a subspace against itself is pure intersection") {
  std::mt19937_64 rng(41);
  std::normal_distribution<double> gauss;
  MatrixXd cols(10, 2);
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 2; ++j) cols(i, j) = gauss(rng);
  const DataSet data =
      make_dataset(MatrixXd::Zero(10, 1), MatrixXd::Zero(10, 1));
  const InnerProductContext ctx(data);
  const auto basis = basis_from_columns(cols, ctx);
  const auto report = min_angle(basis, basis);
  CHECK(report.c0 == doctest::Approx(1.0));
  CHECK(report.intersection_dimension == 2);
  CHECK(report.c == doctest::Approx(0.0));
}

TEST_CASE("two difference stencils meet at cosine 2/3") {
  // Inputs sqrt(5) * I realize an orthonormal neighborhood family, so the
  // empirical angle between the stencil features equals the vector angle
  // between their coefficient stencils.
  MatrixXd inputs = std::sqrt(5.0) * MatrixXd::Identity(5, 5);
  const DataSet data = make_dataset(inputs, MatrixXd::Zero(5, 1));
  const InnerProductContext ctx(data);
  VectorXd b1(5), b2(5);
  b1 << 1, 1, -2, 0, 0;
  b2 << 0, 0, -2, 1, 1;
  const MatrixXd g = inputs * b1;
  const MatrixXd h = inputs * b2;
  const auto report = min_angle(basis_from_columns(g, ctx),
                                basis_from_columns(h, ctx));
  CHECK(report.c == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("closed-form rate for the coupled stencil family") {
  CHECK(closed_form_c_nu(0.0) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(closed_form_c_nu(-2.0 / 3.0) == doctest::Approx(0.0));
  CHECK(closed_form_c_nu(2.0) ==
        doctest::Approx(std::sqrt(64.0 / 69.0)).epsilon(1e-12));
}

TEST_CASE("a-priori error bound examples") {
  const double c = 1.0 / std::sqrt(2.0);
  CHECK(a_priori_bound(c, 0.0, 1.0, 1, 1).value ==
        doctest::Approx(0.70711).epsilon(1e-4));
  CHECK(a_priori_bound(0.0, 0.1, 1.0, 3, 2).value ==
        doctest::Approx(0.21).epsilon(1e-12));
  CHECK(a_priori_bound(0.0, 0.0, 1.0, 2, 3).value == doctest::Approx(0.0));
}

TEST_CASE("a-posteriori error bound examples") {
  const double c = 1.0 / std::sqrt(2.0);
  CHECK(a_posteriori_bound(c, 0.01, 1.0, 2).value ==
        doctest::Approx(0.0565685).epsilon(1e-4));
  CHECK(a_posteriori_bound(c, 0.0, 1.0, 2).value == doctest::Approx(0.0));
  CHECK_THROWS_WITH_AS(a_posteriori_bound(1.0, 0.01, 1.0, 1),
                       "degenerate angle", Error);
}

TEST_CASE("angle estimates are ordered and bounded") {
  std::mt19937_64 rng(42);
  for (int rep = 0; rep < 200; ++rep) {
    const auto inst = testing::random_instance(rng, 20, 5, 2, 2, false);
    const InnerProductContext ctx(inst.data);
    const auto basis_g = basis_from_columns(
        inst.map_g.evaluate_rows(inst.data.inputs), ctx);
    const auto basis_h = basis_from_columns(
        inst.map_h.evaluate_rows(inst.data.inputs), ctx);
    const auto report = min_angle(basis_g, basis_h);
    CHECK(report.c >= 0.0);
    CHECK(report.c <= report.c0 + 1e-12);
    CHECK(report.c0 <= 1.0 + 1e-12);
  }
}

TEST_CASE("c0 equals the norm of the projector product") {
  std::mt19937_64 rng(43);
  const auto inst = testing::random_instance(rng, 25, 6, 2, 2, false);
  const InnerProductContext ctx(inst.data);
  const auto basis_g =
      basis_from_columns(inst.map_g.evaluate_rows(inst.data.inputs), ctx);
  const auto basis_h =
      basis_from_columns(inst.map_h.evaluate_rows(inst.data.inputs), ctx);
  const auto report = min_angle(basis_g, basis_h);

  const MatrixXd pg = basis_g.q * basis_g.q.transpose();
  const MatrixXd ph = basis_h.q * basis_h.q.transpose();
  Eigen::JacobiSVD<MatrixXd> svd(pg * ph);
  CHECK(svd.singularValues()(0) == doctest::Approx(report.c0).epsilon(1e-10));
}

TEST_CASE("shared directions are deflated before reading off c") {
  std::mt19937_64 rng(44);
  std::normal_distribution<double> gauss;
  MatrixXd shared(12, 1), extra_g(12, 1), extra_h(12, 1);
  for (int i = 0; i < 12; ++i) {
    shared(i, 0) = gauss(rng);
    extra_g(i, 0) = gauss(rng);
    extra_h(i, 0) = gauss(rng);
  }
  const DataSet data =
      make_dataset(MatrixXd::Zero(12, 1), MatrixXd::Zero(12, 1));
  const InnerProductContext ctx(data);
  const auto basis_g = basis_from_columns(
      (MatrixXd(12, 2) << shared, extra_g).finished(), ctx);
  const auto basis_h = basis_from_columns(
      (MatrixXd(12, 2) << shared, extra_h).finished(), ctx);
  const auto report = min_angle(basis_g, basis_h);
  CHECK(report.c0 == doctest::Approx(1.0));
  CHECK(report.intersection_dimension == 1);
  CHECK(report.c < 1.0 - 1e-6);
}

TEST_CASE("joint projection oracle") {
  SUBCASE("representable toy target is reproduced exactly") {
    const DataSet data = testing::toy_dataset();
    const auto oracle = joint_projection_oracle(
        data, linear_map(MatrixXd::Identity(1, 1), "x"),
        testing::constant_map());
    CHECK((oracle.predict_rows(data.inputs) - data.targets)
              .cwiseAbs()
              .maxCoeff() < 1e-10);
  }

  SUBCASE("orthogonal spaces split the projection") {
    std::mt19937_64 rng(45);
    std::normal_distribution<double> gauss;
    MatrixXd inputs(30, 2), targets(30, 1);
    for (int i = 0; i < 30; ++i) {
      inputs(i, 0) = gauss(rng);
      inputs(i, 1) = gauss(rng);
      targets(i, 0) = gauss(rng);
    }
    MatrixXd a_g(1, 2), a_h(1, 2);
    a_g << 1, 0;
    a_h << 0, 1;
    const DataSet data = make_dataset(inputs, targets);
    const FeatureMap map_g = linear_map(a_g, "x0");
    const FeatureMap map_h = linear_map(a_h, "x1");
    const auto oracle = joint_projection_oracle(data, map_g, map_h);
    const auto proj_g = fit_projection(data, map_g);
    const auto proj_h = fit_projection(data, map_h);
    const InnerProductContext ctx(data);
    // With nearly orthogonal component spans the joint projection is close
    // to the sum of the individual projections.
    const MatrixXd split =
        proj_g.predict_rows(inputs) + proj_h.predict_rows(inputs);
    const double cross =
        std::abs(ctx.inner(map_g.evaluate_rows(inputs),
                           map_h.evaluate_rows(inputs)));
    CHECK(ctx.norm(oracle.predict_rows(inputs) - split) <=
          10.0 * cross + 1e-10);
  }

  SUBCASE("a target orthogonal to both spaces projects to zero") {
    MatrixXd inputs(2, 1), targets(2, 1);
    inputs << 1.0, -1.0;   // identity feature evaluates to (1, -1)
    targets << 1.0, 1.0;   // orthogonal to it under the empirical product
    const DataSet data = make_dataset(inputs, targets);
    const FeatureMap map = linear_map(MatrixXd::Identity(1, 1), "x");
    const auto oracle = joint_projection_oracle(data, map, map);
    CHECK(oracle.predict_rows(inputs).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("angle report JSON export") {
  AngleReport report;
  report.c0 = 0.9;
  report.c = 0.5;
  report.intersection_dimension = 1;
  const fs::path path = fs::temp_directory_path() / "modcomb_test_angle.json";
  save_angle_report_json(report, path.string());
  std::ifstream in(path.string());
  const auto j = nlohmann::json::parse(in);
  CHECK(j.at("c0").get<double>() == doctest::Approx(0.9));
  CHECK(j.at("c").get<double>() == doctest::Approx(0.5));
  CHECK(j.at("intersection_dim").get<int>() == 1);
  CHECK(j.at("predicted_slope").get<double>() ==
        doctest::Approx(std::log(0.5)));
}
