#include "modcomb/diagnostics.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include <Eigen/SVD>
#include <nlohmann/json.hpp>

namespace modcomb::diag {

VectorXd flatten_scaled(const MatrixXd& eval, Eigen::Index n_samples) {
  require(eval.rows() == n_samples, "evaluation row count mismatch");
  VectorXd flat(eval.size());
  Eigen::Index idx = 0;
  for (Eigen::Index i = 0; i < eval.rows(); ++i)
    for (Eigen::Index j = 0; j < eval.cols(); ++j) flat(idx++) = eval(i, j);
  return flat / std::sqrt(static_cast<double>(n_samples));
}

SubspaceBasis orthonormalize(const std::vector<MatrixXd>& features,
                             const InnerProductContext& ctx,
                             double rank_threshold) {
  require(!features.empty(), "at least one feature required");
  MatrixXd b(features[0].size(), static_cast<Eigen::Index>(features.size()));
  for (size_t j = 0; j < features.size(); ++j)
    b.col(static_cast<Eigen::Index>(j)) =
        flatten_scaled(features[j], ctx.n_samples);
  Eigen::BDCSVD<MatrixXd> svd(b, Eigen::ComputeThinU);
  const double smax = svd.singularValues().size() > 0
                          ? svd.singularValues()(0)
                          : 0.0;
  require(smax > 0.0, "all features are numerically zero");
  Eigen::Index rank = 0;
  while (rank < svd.singularValues().size() &&
         svd.singularValues()(rank) > rank_threshold * smax)
    ++rank;
  SubspaceBasis basis;
  basis.q = svd.matrixU().leftCols(rank);
  basis.rank = rank;
  basis.n_samples = ctx.n_samples;
  return basis;
}

AngleReport min_angle(const SubspaceBasis& g, const SubspaceBasis& h,
                      double intersection_threshold) {
  require(g.n_samples == h.n_samples && g.q.rows() == h.q.rows(),
          "bases must share the inner-product context");
  AngleReport report;
  Eigen::JacobiSVD<MatrixXd> svd(g.q.transpose() * h.q);
  const VectorXd& sv = svd.singularValues();
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    const double s = std::min(sv(i), 1.0);
    if (s >= 1.0 - intersection_threshold) {
      ++report.intersection_dimension;
    } else {
      report.c = std::max(report.c, s);
    }
  }
  report.c0 = sv.size() > 0 ? std::min(sv(0), 1.0) : 0.0;
  return report;
}

double closed_form_c_nu(double nu) {
  const double denom = 9.0 * nu * nu + 12.0 * nu + 9.0;
  return std::sqrt(std::max(0.0, 1.0 - 5.0 / denom));
}

ErrorBound a_priori_bound(double c, double eps_f, double m_bound, int n,
                          int k) {
  require(c >= 0.0 && c <= 1.0 && eps_f >= 0.0 && m_bound > 0.0,
          "invalid bound inputs");
  require(n >= 1 && k >= 1, "n and k must be >= 1");
  const double value =
      (std::pow(1.0 + std::pow(c, 2 * n - 1) + eps_f, k) - 1.0) * m_bound;
  return ErrorBound{ErrorBound::Kind::kAPriori, n, k, value};
}

ErrorBound a_posteriori_bound(double c, double diff_norm, double m_bound,
                              int k) {
  require(c >= 0.0 && diff_norm >= 0.0 && m_bound > 0.0 && k >= 1,
          "invalid bound inputs");
  require(c < 1.0, "degenerate angle");
  const double factor = c / (1.0 - c * c);
  const double x = factor * diff_norm;
  double value;
  if (static_cast<double>(k) * x < 1.0) {
    value = static_cast<double>(k) * static_cast<double>(k) * m_bound * x;
  } else {
    value = (std::pow(1.0 + x, k) - 1.0) * m_bound;
  }
  return ErrorBound{ErrorBound::Kind::kAPosteriori, 0, k, value};
}

modcomb::FeatureModel joint_projection_oracle(const DataSet& data,
                                              const modcomb::FeatureMap& map_g,
                                              const modcomb::FeatureMap& map_h,
                                              double eps_reg) {
  require_dim(map_g.dim_in, data.state_dim(), "oracle feature map G");
  require_dim(map_h.dim_in, data.state_dim(), "oracle feature map H");
  modcomb::FeatureMap joint;
  joint.dim_in = map_g.dim_in;
  joint.dim_out = map_g.dim_out + map_h.dim_out;
  joint.label = "joint(" + map_g.label + "," + map_h.label + ")";
  joint.evaluator = [map_g, map_h](const VectorXd& x) {
    VectorXd out(map_g.dim_out + map_h.dim_out);
    out.head(map_g.dim_out) = map_g(x);
    out.tail(map_h.dim_out) = map_h(x);
    return out;
  };
  return modcomb::fit_projection(data, joint, std::nullopt, eps_reg);
}

void save_angle_report_json(const AngleReport& report,
                            const std::string& path) {
  nlohmann::ordered_json j;
  j["c0"] = report.c0;
  j["c"] = report.c;
  j["intersection_dim"] = report.intersection_dimension;
  j["predicted_slope"] = report.c > 0.0 ? std::log(report.c)
                                        : -std::numeric_limits<double>::infinity();
  std::ofstream out(path);
  require(out.good(), "cannot open " + path + " for writing");
  out << j.dump(2) << "\n";
}

}  // namespace modcomb::diag
