#pragma once

#include <vector>

#include "modcomb/learner.hpp"

namespace modcomb::diag {

using modcomb::DataSet;
using modcomb::InnerProductContext;
using modcomb::MatrixXd;
using modcomb::VectorXd;

/// Orthonormal basis of a span of functions, represented by evaluation
/// vectors on the reference dataset (multi-output functions flattened to
/// long vectors) under the empirical inner product.
struct SubspaceBasis {
  MatrixXd q;           // (N*K_out) x rank, orthonormal columns under (1/N)<.,.>
  Eigen::Index rank = 0;
  Eigen::Index n_samples = 0;

  MatrixXd project(const MatrixXd& flat_vectors) const {
    return q * (q.transpose() * flat_vectors);
  }
};

struct AngleReport {
  double c0 = 0.0;  // cos of the minimum angle before deflation
  double c = 0.0;   // cos of the minimum angle after removing the intersection
  Eigen::Index intersection_dimension = 0;
  double rate_per_iteration() const { return c * c; }
};

struct ErrorBound {
  enum class Kind { kAPriori, kAPosteriori };
  Kind kind = Kind::kAPriori;
  int n = 0;
  int k = 0;
  double value = 0.0;
};

/// Flattens an N x K evaluation matrix into the (N*K) vector used for
/// subspace computations, scaled so that plain Euclidean dot products
/// realize the empirical inner product.
VectorXd flatten_scaled(const MatrixXd& eval, Eigen::Index n_samples);

/// Orthonormalizes the given function evaluations (each an N x K matrix)
/// under the empirical inner product; rank via relative threshold.
SubspaceBasis orthonormalize(const std::vector<MatrixXd>& features,
                             const InnerProductContext& ctx,
                             double rank_threshold = 1e-10);

/// Principal angles via the SVD of the cross-Gram matrix; singular values
/// >= 1 - intersection_threshold count as intersection directions and are
/// deflated before reading off c.
AngleReport min_angle(const SubspaceBasis& g, const SubspaceBasis& h,
                      double intersection_threshold = 1e-8);

/// Closed-form rate sqrt(1 - 5 / (9 nu^2 + 12 nu + 9)) for the
/// two-stencil diffusion model family.
double closed_form_c_nu(double nu);

/// [(1 + c^{2n-1} + eps_F)^k - 1] * M
ErrorBound a_priori_bound(double c, double eps_f, double m_bound, int n, int k);

/// Successive-difference based bound; uses the small-argument quadratic
/// form k^2 M (c/(1-c^2)) * diff_norm when admissible, otherwise the exact
/// power form.
ErrorBound a_posteriori_bound(double c, double diff_norm, double m_bound,
                              int k);

/// Intrusive reference: one least-squares fit over the concatenation of the
/// two feature maps.  Its predictions realize P_{G (+) H}(F) on the data.
modcomb::FeatureModel joint_projection_oracle(const DataSet& data,
                                              const modcomb::FeatureMap& map_g,
                                              const modcomb::FeatureMap& map_h,
                                              double eps_reg = 1e-10);

/// Angle/bound report export as JSON {c0, c, intersection_dim,
/// predicted_slope}.
void save_angle_report_json(const AngleReport& report, const std::string& path);

}  // namespace modcomb::diag
