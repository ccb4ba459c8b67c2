#pragma once

#include <optional>

#include "modcomb/dataset.hpp"
#include "modcomb/feature_map.hpp"

namespace modcomb {

/// Linear-in-coefficients hypothesis: x -> W * Psi(x).
struct FeatureModel {
  FeatureMap feature_map;
  MatrixXd coefficients;  // K_out x p

  VectorXd predict(const VectorXd& x) const {
    return coefficients * feature_map(x);
  }
  MatrixXd predict_rows(const MatrixXd& inputs) const {
    return feature_map.evaluate_rows(inputs) * coefficients.transpose();
  }
};

/// Shared-coefficient model over per-component features:
/// prediction_j = w^T phi_j(u).
struct PointwiseModel {
  ComponentFeatureMap feature_map;
  VectorXd coefficients;  // p

  VectorXd predict(const VectorXd& u) const {
    return feature_map(u) * coefficients;
  }
  MatrixXd predict_rows(const MatrixXd& inputs) const;
};

/// Minimum-norm least squares: argmin_W sum_i ||y_i - W phi_i||^2 via SVD,
/// singular values below eps_rel * sigma_max treated as zero.
/// phi is N x p, targets N x K; returns W as K x p.
MatrixXd least_squares_min_norm(const MatrixXd& phi, const MatrixXd& targets,
                                double eps_rel = 1e-10);

/// Projection P_G of Eq-style empirical least squares: fits W minimizing
/// (1/N) sum ||y_i - W Psi(x_i)||^2.  residual_targets, when given,
/// replaces data.targets without mutating the dataset.
FeatureModel fit_projection(const DataSet& data, const FeatureMap& map,
                            const std::optional<MatrixXd>& residual_targets =
                                std::nullopt,
                            double eps_reg = 1e-10);

/// Shared-coefficient analogue: flattens all N*K scalar rows and solves a
/// single scalar regression.
PointwiseModel fit_pointwise_projection(
    const DataSet& data, const ComponentFeatureMap& map,
    const std::optional<MatrixXd>& residual_targets = std::nullopt,
    double eps_reg = 1e-10);

/// (1/N) sum_i ||y_i - model(x_i)|| (mean of Euclidean norms).
double model_residual_norm(const DataSet& data, const FeatureModel& model);
double model_residual_norm(const DataSet& data, const PointwiseModel& model);

/// Empirical inner product of two functions given by callables on states.
double empirical_inner_product(
    const std::function<VectorXd(const VectorXd&)>& f,
    const std::function<VectorXd(const VectorXd&)>& g, const DataSet& data);

}  // namespace modcomb
