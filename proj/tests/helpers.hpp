// Shared fixtures for the test suites: the two-sample toy instance whose
// evaluation geometry is span{(1,0)} vs span{(1,1)}/sqrt(2), and random
// linear-subspace instances with a known joint projection.
#pragma once

#include <cmath>
#include <random>

#include "modcomb/combiner.hpp"
#include "modcomb/diagnostics.hpp"

namespace testing {

using modcomb::DataSet;
using modcomb::FeatureMap;
using modcomb::LinearLearner;
using modcomb::MatrixXd;
using modcomb::VectorXd;

/// Feature map x -> [1] on scalar states.
inline FeatureMap constant_map() {
  FeatureMap map;
  map.dim_in = 1;
  map.dim_out = 1;
  map.label = "constant";
  map.evaluator = [](const VectorXd&) { return VectorXd::Ones(1); };
  return map;
}

/// Two scalar samples at x = 1 and x = 0; the identity feature evaluates to
/// (1, 0) and the constant feature to (1, 1).  Targets (0, sqrt(2)) give
/// ||F||_D = 1.
inline DataSet toy_dataset() {
  MatrixXd inputs(2, 1), targets(2, 1);
  inputs << 1.0, 0.0;
  targets << 0.0, std::sqrt(2.0);
  return modcomb::make_dataset(inputs, targets);
}

struct SubspaceInstance {
  DataSet data;
  FeatureMap map_g;
  FeatureMap map_h;
};

/// Random scalar-output instance: N samples in R^k, feature spaces given by
/// random linear maps of ranks dim_g and dim_h.  When in_sum is true the
/// target is a random combination of both feature sets, so F lies in the
/// direct sum exactly.
inline SubspaceInstance random_instance(std::mt19937_64& rng, int n_samples,
                                        int k, int dim_g, int dim_h,
                                        bool in_sum) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  MatrixXd inputs(n_samples, k);
  for (int i = 0; i < n_samples; ++i)
    for (int j = 0; j < k; ++j) inputs(i, j) = gauss(rng);

  MatrixXd a_g(dim_g, k), a_h(dim_h, k);
  for (int i = 0; i < dim_g; ++i)
    for (int j = 0; j < k; ++j) a_g(i, j) = gauss(rng);
  for (int i = 0; i < dim_h; ++i)
    for (int j = 0; j < k; ++j) a_h(i, j) = gauss(rng);

  MatrixXd targets;
  if (in_sum) {
    VectorXd w_g(dim_g), w_h(dim_h);
    for (int i = 0; i < dim_g; ++i) w_g(i) = gauss(rng);
    for (int i = 0; i < dim_h; ++i) w_h(i) = gauss(rng);
    targets = inputs * a_g.transpose() * w_g + inputs * a_h.transpose() * w_h;
  } else {
    targets.resize(n_samples, 1);
    for (int i = 0; i < n_samples; ++i) targets(i, 0) = gauss(rng);
  }

  SubspaceInstance inst;
  inst.data = modcomb::make_dataset(std::move(inputs), std::move(targets));
  inst.map_g = modcomb::linear_map(a_g, "g");
  inst.map_h = modcomb::linear_map(a_h, "h");
  return inst;
}

/// Cosine of the minimum angle between the two feature spans of an
/// instance, via the diagnostics pipeline.
inline double measured_c(const SubspaceInstance& inst) {
  modcomb::InnerProductContext ctx(inst.data);
  std::vector<MatrixXd> feats_g, feats_h;
  const MatrixXd phi_g = inst.map_g.evaluate_rows(inst.data.inputs);
  const MatrixXd phi_h = inst.map_h.evaluate_rows(inst.data.inputs);
  for (Eigen::Index j = 0; j < phi_g.cols(); ++j)
    feats_g.push_back(phi_g.col(j));
  for (Eigen::Index j = 0; j < phi_h.cols(); ++j)
    feats_h.push_back(phi_h.col(j));
  const auto basis_g = modcomb::diag::orthonormalize(feats_g, ctx);
  const auto basis_h = modcomb::diag::orthonormalize(feats_h, ctx);
  return modcomb::diag::min_angle(basis_g, basis_h).c;
}

}  // namespace testing
