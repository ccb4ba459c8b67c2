#include "modcomb/learner.hpp"

namespace modcomb {

std::shared_ptr<Model> FeatureModelHandle::blend(double a, const Model& other,
                                                 double b) const {
  const auto* o = dynamic_cast<const FeatureModelHandle*>(&other);
  require(o != nullptr, "cannot blend models of different kinds");
  require(o->model_.coefficients.rows() == model_.coefficients.rows() &&
              o->model_.coefficients.cols() == model_.coefficients.cols(),
          "cannot blend models with different coefficient shapes");
  FeatureModel m = model_;
  m.coefficients = a * model_.coefficients + b * o->model_.coefficients;
  return std::make_shared<FeatureModelHandle>(std::move(m));
}

std::shared_ptr<Model> PointwiseModelHandle::blend(double a, const Model& other,
                                                   double b) const {
  const auto* o = dynamic_cast<const PointwiseModelHandle*>(&other);
  require(o != nullptr, "cannot blend models of different kinds");
  require(o->model_.coefficients.size() == model_.coefficients.size(),
          "cannot blend models with different coefficient shapes");
  PointwiseModel m = model_;
  m.coefficients = a * model_.coefficients + b * o->model_.coefficients;
  return std::make_shared<PointwiseModelHandle>(std::move(m));
}

std::shared_ptr<Model> LinearLearner::fit(const DataSet& data,
                                          const MatrixXd& targets) const {
  return std::make_shared<FeatureModelHandle>(
      fit_projection(data, map_, targets, eps_reg_));
}

std::shared_ptr<Model> PointwiseLearner::fit(const DataSet& data,
                                             const MatrixXd& targets) const {
  return std::make_shared<PointwiseModelHandle>(
      fit_pointwise_projection(data, map_, targets, eps_reg_));
}

}  // namespace modcomb
