#include "modcomb/projection.hpp"

#include <Eigen/SVD>

namespace modcomb {

MatrixXd PointwiseModel::predict_rows(const MatrixXd& inputs) const {
  MatrixXd out(inputs.rows(), feature_map.state_dim);
  for (Eigen::Index i = 0; i < inputs.rows(); ++i)
    out.row(i) = predict(inputs.row(i).transpose()).transpose();
  return out;
}

MatrixXd least_squares_min_norm(const MatrixXd& phi, const MatrixXd& targets,
                                double eps_rel) {
  require(phi.rows() == targets.rows(), "feature/target row mismatch");
  require(phi.allFinite() && targets.allFinite(),
          "non-finite values in regression data");
  require(phi.cwiseAbs().maxCoeff() > 0.0, "degenerate feature map");
  Eigen::BDCSVD<MatrixXd> svd(phi, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(eps_rel);
  // W^T = V S^+ U^T Y, the minimum-norm solution.
  return svd.solve(targets).transpose();
}

FeatureModel fit_projection(const DataSet& data, const FeatureMap& map,
                            const std::optional<MatrixXd>& residual_targets,
                            double eps_reg) {
  const MatrixXd& y = residual_targets ? *residual_targets : data.targets;
  require(y.rows() == data.size() && y.cols() == data.targets.cols(),
          "residual targets must match dataset shape");
  const MatrixXd phi = map.evaluate_rows(data.inputs);
  return FeatureModel{map, least_squares_min_norm(phi, y, eps_reg)};
}

PointwiseModel fit_pointwise_projection(
    const DataSet& data, const ComponentFeatureMap& map,
    const std::optional<MatrixXd>& residual_targets, double eps_reg) {
  const MatrixXd& y = residual_targets ? *residual_targets : data.targets;
  require(y.rows() == data.size() && y.cols() == data.targets.cols(),
          "residual targets must match dataset shape");
  const Eigen::Index n = data.size();
  const Eigen::Index k = map.state_dim;
  MatrixXd phi(n * k, map.n_features);
  MatrixXd flat(n * k, 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    phi.middleRows(i * k, k) = map(data.inputs.row(i).transpose());
    flat.block(i * k, 0, k, 1) = y.row(i).transpose();
  }
  MatrixXd w = least_squares_min_norm(phi, flat, eps_reg);
  return PointwiseModel{map, w.row(0).transpose()};
}

double model_residual_norm(const DataSet& data, const FeatureModel& model) {
  return mean_row_norm(data.targets - model.predict_rows(data.inputs));
}

double model_residual_norm(const DataSet& data, const PointwiseModel& model) {
  return mean_row_norm(data.targets - model.predict_rows(data.inputs));
}

double empirical_inner_product(
    const std::function<VectorXd(const VectorXd&)>& f,
    const std::function<VectorXd(const VectorXd&)>& g, const DataSet& data) {
  require(data.size() >= 1, "empty dataset");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    const VectorXd x = data.inputs.row(i).transpose();
    acc += f(x).dot(g(x));
  }
  return acc / static_cast<double>(data.size());
}

}  // namespace modcomb
