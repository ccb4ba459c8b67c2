#pragma once

#include <functional>
#include <string>

#include "modcomb/common.hpp"

namespace modcomb {

/// Deterministic feature map R^K -> R^p.
struct FeatureMap {
  Eigen::Index dim_in = 0;
  Eigen::Index dim_out = 0;
  std::function<VectorXd(const VectorXd&)> evaluator;
  std::string label;

  VectorXd operator()(const VectorXd& x) const {
    require_dim(dim_in, x.size(), "feature map '" + label + "' input");
    VectorXd out = evaluator(x);
    require_dim(dim_out, out.size(), "feature map '" + label + "' output");
    return out;
  }

  /// Row-per-sample evaluation matrix (N x p).
  MatrixXd evaluate_rows(const MatrixXd& inputs) const;
};

VectorXd evaluate_features(const FeatureMap& map, const VectorXd& x);

/// [1, x, x^2, ..., x^degree] on scalar states.
FeatureMap polynomial_map(int degree);

/// Identity feature x -> x.
FeatureMap identity_map(Eigen::Index dim);

/// Linear features x -> A x.
FeatureMap linear_map(const MatrixXd& A, const std::string& label = "linear");

/// Gaussian radial basis features exp(-||x - c_j||^2 / (2 w^2)) with
/// centers on a uniform grid over [lo, hi] per coordinate and width equal
/// to twice the grid spacing.
FeatureMap rbf_grid_map(Eigen::Index dim, double lo, double hi,
                        int centers_per_axis);

/// Per-component feature extractor for shared-coefficient models on
/// K-dimensional states: maps a state u in R^K to a K x p matrix whose
/// row j holds the features driving component j of the prediction.
struct ComponentFeatureMap {
  Eigen::Index state_dim = 0;
  Eigen::Index n_features = 0;
  std::function<MatrixXd(const VectorXd&)> evaluator;
  std::string label;

  MatrixXd operator()(const VectorXd& u) const {
    require_dim(state_dim, u.size(), "component map '" + label + "' input");
    MatrixXd rows = evaluator(u);
    require(rows.rows() == state_dim && rows.cols() == n_features,
            "component map '" + label + "' produced wrong shape");
    return rows;
  }
};

/// Scalar dictionary applied pointwise to every component of the state.
ComponentFeatureMap pointwise_map(const FeatureMap& scalar_map,
                                  Eigen::Index state_dim);

/// Central second difference (u_{j-1} - 2 u_j + u_{j+1}) / dz^2 with
/// homogeneous Dirichlet values outside the state vector.
ComponentFeatureMap second_difference_map(Eigen::Index state_dim, double dz);

}  // namespace modcomb
