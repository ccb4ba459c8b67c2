#pragma once

#include <memory>

#include "modcomb/projection.hpp"

namespace modcomb {

/// A fitted model usable by the combiner: predictions on single states,
/// batch evaluation, and affine blending (all hypothesis spaces here are
/// linear in their coefficients, so a*m1 + b*m2 stays in the space).
class Model {
 public:
  virtual ~Model() = default;
  virtual VectorXd predict(const VectorXd& x) const = 0;
  virtual MatrixXd evaluate(const DataSet& data) const = 0;
  virtual std::shared_ptr<Model> blend(double a, const Model& other,
                                       double b) const = 0;
};

/// Non-intrusive learner contract: the combiner only ever calls fit() with
/// (possibly residual) targets and consumes the returned Model.
class Learner {
 public:
  virtual ~Learner() = default;
  virtual std::shared_ptr<Model> fit(const DataSet& data,
                                     const MatrixXd& targets) const = 0;
};

class FeatureModelHandle final : public Model {
 public:
  explicit FeatureModelHandle(FeatureModel m) : model_(std::move(m)) {}
  VectorXd predict(const VectorXd& x) const override {
    return model_.predict(x);
  }
  MatrixXd evaluate(const DataSet& data) const override {
    return model_.predict_rows(data.inputs);
  }
  std::shared_ptr<Model> blend(double a, const Model& other,
                               double b) const override;
  const FeatureModel& model() const { return model_; }

 private:
  FeatureModel model_;
};

class PointwiseModelHandle final : public Model {
 public:
  explicit PointwiseModelHandle(PointwiseModel m) : model_(std::move(m)) {}
  VectorXd predict(const VectorXd& x) const override {
    return model_.predict(x);
  }
  MatrixXd evaluate(const DataSet& data) const override {
    return model_.predict_rows(data.inputs);
  }
  std::shared_ptr<Model> blend(double a, const Model& other,
                               double b) const override;
  const PointwiseModel& model() const { return model_; }

 private:
  PointwiseModel model_;
};

/// Least-squares learner over a FeatureMap.
class LinearLearner final : public Learner {
 public:
  explicit LinearLearner(FeatureMap map, double eps_reg = 1e-10)
      : map_(std::move(map)), eps_reg_(eps_reg) {}
  std::shared_ptr<Model> fit(const DataSet& data,
                             const MatrixXd& targets) const override;
  const FeatureMap& map() const { return map_; }

 private:
  FeatureMap map_;
  double eps_reg_;
};

/// Shared-coefficient learner over a ComponentFeatureMap.
class PointwiseLearner final : public Learner {
 public:
  explicit PointwiseLearner(ComponentFeatureMap map, double eps_reg = 1e-10)
      : map_(std::move(map)), eps_reg_(eps_reg) {}
  std::shared_ptr<Model> fit(const DataSet& data,
                             const MatrixXd& targets) const override;
  const ComponentFeatureMap& map() const { return map_; }

 private:
  ComponentFeatureMap map_;
  double eps_reg_;
};

/// Sum of two fitted models, the object returned by the combiner.
class CombinedModel final : public Model {
 public:
  CombinedModel(std::shared_ptr<const Model> first,
                std::shared_ptr<const Model> second)
      : first_(std::move(first)), second_(std::move(second)) {}
  VectorXd predict(const VectorXd& x) const override {
    return first_->predict(x) + second_->predict(x);
  }
  MatrixXd evaluate(const DataSet& data) const override {
    return first_->evaluate(data) + second_->evaluate(data);
  }
  std::shared_ptr<Model> blend(double, const Model&,
                               double) const override {
    throw Error("CombinedModel does not support blending");
  }

 private:
  std::shared_ptr<const Model> first_;
  std::shared_ptr<const Model> second_;
};

}  // namespace modcomb
