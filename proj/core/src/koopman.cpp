#include "modcomb/koopman.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

namespace modcomb::koopman {

Dictionary build_polynomial_dictionary(Eigen::Index state_dim, int degree) {
  require(degree >= 1, "dictionary degree must be >= 1");
  require(state_dim >= 1, "state dimension must be >= 1");
  // Layout: [1, x_1..x_K, x_1^2..x_1^d, ..., x_K^2..x_K^d].  Higher powers
  // are taken per scalar component; the constant and state blocks are shared.
  const Eigen::Index p = 1 + state_dim * degree;
  FeatureMap m;
  m.dim_in = state_dim;
  m.dim_out = p;
  m.label = "dict_poly" + std::to_string(degree);
  m.evaluator = [state_dim, degree](const VectorXd& x) {
    VectorXd out(1 + state_dim * degree);
    out(0) = 1.0;
    out.segment(1, state_dim) = x;
    Eigen::Index idx = 1 + state_dim;
    for (Eigen::Index j = 0; j < state_dim; ++j) {
      double power = x(j);
      for (int d = 2; d <= degree; ++d) {
        power *= x(j);
        out(idx++) = power;
      }
    }
    return out;
  };
  return Dictionary{std::move(m), state_dim, "polynomial", degree};
}

Dictionary build_rbf_dictionary(Eigen::Index state_dim, double lo, double hi,
                                int n_centers) {
  require(state_dim == 1, "RBF dictionary supports scalar states");
  FeatureMap rbf = rbf_grid_map(1, lo, hi, n_centers);
  FeatureMap m;
  m.dim_in = 1;
  m.dim_out = 2 + n_centers;
  m.label = "dict_rbf" + std::to_string(n_centers);
  m.evaluator = [rbf](const VectorXd& x) {
    VectorXd out(2 + rbf.dim_out);
    out(0) = 1.0;
    out(1) = x(0);
    out.segment(2, rbf.dim_out) = rbf(x);
    return out;
  };
  return Dictionary{std::move(m), 1, "rbf", 0};
}

KoopmanModel fit_koopman(const DataSet& data, const Dictionary& dict,
                         Supervision supervision,
                         const std::optional<MatrixXd>& residual_targets,
                         double eps_reg) {
  require_dim(dict.state_dim, data.state_dim(), "dictionary state dimension");
  const Eigen::Index p = dict.lifted_dim();
  const MatrixXd zx = dict.map.evaluate_rows(data.inputs);
  MatrixXd op = MatrixXd::Zero(p, p);

  if (supervision == Supervision::kFullDictionary) {
    MatrixXd zy = dict.map.evaluate_rows(data.targets);
    if (residual_targets) {
      require(residual_targets->rows() == data.size() &&
                  residual_targets->cols() == dict.state_dim,
              "residual targets must match dataset shape");
      zy.middleCols(1, dict.state_dim) = *residual_targets;
    }
    op = least_squares_min_norm(zx, zy, eps_reg);
  } else {
    const MatrixXd& y = residual_targets ? *residual_targets : data.targets;
    require(y.rows() == data.size() && y.cols() == dict.state_dim,
            "residual targets must match dataset shape");
    op.middleRows(1, dict.state_dim) = least_squares_min_norm(zx, y, eps_reg);
  }
  return KoopmanModel{dict, std::move(op)};
}

VectorXd koopman_predict(const KoopmanModel& model, const VectorXd& x) {
  return model.predict_state(x);
}

void save_koopman_json(const KoopmanModel& model, const std::string& path) {
  nlohmann::ordered_json j;
  j["dictionary"]["family"] = model.dictionary.family;
  j["dictionary"]["degree"] = model.dictionary.degree;
  j["dictionary"]["state_dim"] = model.dictionary.state_dim;
  std::vector<double> flat;
  flat.reserve(model.op.size());
  for (Eigen::Index r = 0; r < model.op.rows(); ++r)
    for (Eigen::Index c = 0; c < model.op.cols(); ++c)
      flat.push_back(model.op(r, c));
  j["operator"]["rows"] = model.op.rows();
  j["operator"]["data_row_major"] = flat;
  std::ofstream out(path);
  require(out.good(), "cannot open " + path + " for writing");
  out << j.dump(2) << "\n";
}

KoopmanModel load_koopman_json(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open " + path);
  nlohmann::json j;
  in >> j;
  require(j["dictionary"]["family"] == "polynomial",
          "only polynomial dictionaries round-trip through JSON");
  Dictionary dict = build_polynomial_dictionary(
      j["dictionary"]["state_dim"].get<Eigen::Index>(),
      j["dictionary"]["degree"].get<int>());
  const auto rows = j["operator"]["rows"].get<Eigen::Index>();
  const auto flat = j["operator"]["data_row_major"].get<std::vector<double>>();
  require(rows * rows == static_cast<Eigen::Index>(flat.size()),
          "operator matrix must be square");
  MatrixXd op(rows, rows);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < rows; ++c) op(r, c) = flat[r * rows + c];
  return KoopmanModel{std::move(dict), std::move(op)};
}

PointwiseLearner pointwise_dictionary_learner(Eigen::Index state_dim,
                                              int degree, double eps_reg) {
  return PointwiseLearner(pointwise_map(polynomial_map(degree), state_dim),
                          eps_reg);
}

}  // namespace modcomb::koopman
