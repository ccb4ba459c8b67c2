#pragma once

#include <string>

#include "modcomb/learner.hpp"

namespace modcomb::koopman {

/// Observable dictionary with layout [1, x, Phi(x)].  The first component
/// is identically one and components 1..K copy the state, so the state can
/// always be read back out of a lifted vector.
struct Dictionary {
  FeatureMap map;            // R^K -> R^p
  Eigen::Index state_dim;    // K
  std::string family;        // "polynomial" or "rbf"
  int degree = 0;            // polynomial degree, when applicable

  Eigen::Index lifted_dim() const { return map.dim_out; }
  VectorXd lift(const VectorXd& x) const { return map(x); }
  /// g(z): the state block, components 1..K of the lifted vector.
  VectorXd extract_state(const VectorXd& z) const {
    return z.segment(1, state_dim);
  }
};

/// Finite-dimensional Koopman approximation z_{n+1} = K z_n with state
/// extraction x_{n+1} = g(K Psi(x_n)).
struct KoopmanModel {
  Dictionary dictionary;
  MatrixXd op;  // p x p; rows outside the state block may be zero when
                // only the state block was supervised.

  VectorXd predict_state(const VectorXd& x) const {
    return dictionary.extract_state(op * dictionary.lift(x));
  }
};

/// Scalar dictionary [1, u, ..., u^degree].  For state_dim > 1 the same
/// scalar dictionary is meant to be applied per component (see
/// pointwise_reaction_learner below).
Dictionary build_polynomial_dictionary(Eigen::Index state_dim, int degree);

/// Gaussian RBF dictionary [1, x, rbf_1(x), ..].  Centers on a uniform
/// grid over [lo, hi], width twice the grid spacing.
Dictionary build_rbf_dictionary(Eigen::Index state_dim, double lo, double hi,
                                int n_centers);

enum class Supervision {
  kFullDictionary,  // targets Psi(y), the standalone EDMD fit
  kStateBlock,      // targets y only; used inside the combiner
};

/// Fits K minimizing (1/N) sum ||Psi(y_i) - K Psi(x_i)||^2 (full mode) or
/// the state-block rows only.  residual_targets, when given, replaces the
/// state-block targets y.
KoopmanModel fit_koopman(const DataSet& data, const Dictionary& dict,
                         Supervision supervision = Supervision::kFullDictionary,
                         const std::optional<MatrixXd>& residual_targets =
                             std::nullopt,
                         double eps_reg = 1e-10);

VectorXd koopman_predict(const KoopmanModel& model, const VectorXd& x);

/// JSON round trip: dictionary descriptor (family, degree, state_dim) plus
/// the operator matrix row-major.
void save_koopman_json(const KoopmanModel& model, const std::string& path);
KoopmanModel load_koopman_json(const std::string& path);

/// Learner whose hypothesis space is the span of the scalar dictionary
/// applied pointwise per state component with shared coefficients.  This is
/// the P_H used for pointwise reaction terms.
PointwiseLearner pointwise_dictionary_learner(Eigen::Index state_dim,
                                              int degree,
                                              double eps_reg = 1e-10);

}  // namespace modcomb::koopman
