#include "modcomb/feature_map.hpp"

#include <cmath>

namespace modcomb {

MatrixXd FeatureMap::evaluate_rows(const MatrixXd& inputs) const {
  require_dim(dim_in, inputs.cols(), "feature map '" + label + "' batch input");
  MatrixXd out(inputs.rows(), dim_out);
  for (Eigen::Index i = 0; i < inputs.rows(); ++i)
    out.row(i) = (*this)(inputs.row(i).transpose()).transpose();
  return out;
}

VectorXd evaluate_features(const FeatureMap& map, const VectorXd& x) {
  return map(x);
}

FeatureMap polynomial_map(int degree) {
  require(degree >= 1, "polynomial map requires degree >= 1");
  FeatureMap m;
  m.dim_in = 1;
  m.dim_out = degree + 1;
  m.label = "poly" + std::to_string(degree);
  m.evaluator = [degree](const VectorXd& x) {
    VectorXd out(degree + 1);
    out(0) = 1.0;
    for (int d = 1; d <= degree; ++d) out(d) = out(d - 1) * x(0);
    return out;
  };
  return m;
}

FeatureMap identity_map(Eigen::Index dim) {
  FeatureMap m;
  m.dim_in = dim;
  m.dim_out = dim;
  m.label = "identity";
  m.evaluator = [](const VectorXd& x) { return x; };
  return m;
}

FeatureMap linear_map(const MatrixXd& A, const std::string& label) {
  FeatureMap m;
  m.dim_in = A.cols();
  m.dim_out = A.rows();
  m.label = label;
  m.evaluator = [A](const VectorXd& x) -> VectorXd { return A * x; };
  return m;
}

FeatureMap rbf_grid_map(Eigen::Index dim, double lo, double hi,
                        int centers_per_axis) {
  require(dim == 1, "rbf_grid_map currently supports scalar states");
  require(centers_per_axis >= 2, "need at least two RBF centers");
  const double spacing = (hi - lo) / (centers_per_axis - 1);
  const double width = 2.0 * spacing;
  VectorXd centers(centers_per_axis);
  for (int j = 0; j < centers_per_axis; ++j) centers(j) = lo + j * spacing;
  FeatureMap m;
  m.dim_in = 1;
  m.dim_out = centers_per_axis;
  m.label = "rbf" + std::to_string(centers_per_axis);
  m.evaluator = [centers, width](const VectorXd& x) {
    VectorXd out(centers.size());
    for (Eigen::Index j = 0; j < centers.size(); ++j) {
      const double d = x(0) - centers(j);
      out(j) = std::exp(-d * d / (2.0 * width * width));
    }
    return out;
  };
  return m;
}

ComponentFeatureMap pointwise_map(const FeatureMap& scalar_map,
                                  Eigen::Index state_dim) {
  require(scalar_map.dim_in == 1, "pointwise map requires a scalar dictionary");
  ComponentFeatureMap m;
  m.state_dim = state_dim;
  m.n_features = scalar_map.dim_out;
  m.label = "pointwise(" + scalar_map.label + ")";
  m.evaluator = [scalar_map, state_dim](const VectorXd& u) {
    MatrixXd rows(state_dim, scalar_map.dim_out);
    VectorXd scalar(1);
    for (Eigen::Index j = 0; j < state_dim; ++j) {
      scalar(0) = u(j);
      rows.row(j) = scalar_map(scalar).transpose();
    }
    return rows;
  };
  return m;
}

ComponentFeatureMap second_difference_map(Eigen::Index state_dim, double dz) {
  require(state_dim >= 1 && dz > 0, "invalid stencil parameters");
  ComponentFeatureMap m;
  m.state_dim = state_dim;
  m.n_features = 1;
  m.label = "second_difference";
  const double inv = 1.0 / (dz * dz);
  m.evaluator = [state_dim, inv](const VectorXd& u) {
    MatrixXd rows(state_dim, 1);
    for (Eigen::Index j = 0; j < state_dim; ++j) {
      const double left = j > 0 ? u(j - 1) : 0.0;
      const double right = j + 1 < state_dim ? u(j + 1) : 0.0;
      rows(j, 0) = (left - 2.0 * u(j) + right) * inv;
    }
    return rows;
  };
  return m;
}

}  // namespace modcomb
