#pragma once

#include <optional>
#include <string>

#include "modcomb/common.hpp"

namespace modcomb {

/// Snapshot pairs (x_k, x_{k+1}) with optional per-sample control and
/// external inputs.  Rows are samples; all matrices share the row count.
struct DataSet {
  MatrixXd inputs;    // N x K
  MatrixXd targets;   // N x K
  MatrixXd controls;  // N x m_c, may have zero columns
  MatrixXd externals; // N x m_e, may have zero columns

  Eigen::Index size() const { return inputs.rows(); }
  Eigen::Index state_dim() const { return inputs.cols(); }
  bool has_controls() const { return controls.cols() > 0; }
  bool has_externals() const { return externals.cols() > 0; }

  void validate() const;
};

DataSet make_dataset(MatrixXd inputs, MatrixXd targets,
                     MatrixXd controls = MatrixXd(),
                     MatrixXd externals = MatrixXd());

/// Empirical inner product context: all Hilbert-space quantities are
/// evaluated through a reference dataset.  Functions are identified with
/// their evaluation matrices on that dataset (N rows, one column per
/// output coordinate).
struct InnerProductContext {
  Eigen::Index n_samples = 0;
  double eps_reg = 1e-10;

  explicit InnerProductContext(Eigen::Index n, double eps = 1e-10)
      : n_samples(n), eps_reg(eps) {
    require(n >= 1, "empty dataset");
  }
  explicit InnerProductContext(const DataSet& data, double eps = 1e-10)
      : InnerProductContext(data.size(), eps) {}

  /// <f,g>_D = (1/N) sum_i f(x_i)^T g(x_i)
  double inner(const MatrixXd& f_eval, const MatrixXd& g_eval) const {
    require(f_eval.rows() == n_samples && g_eval.rows() == n_samples &&
                f_eval.cols() == g_eval.cols(),
            "inner product: evaluation shape mismatch");
    return f_eval.cwiseProduct(g_eval).sum() / static_cast<double>(n_samples);
  }

  double norm(const MatrixXd& f_eval) const {
    return std::sqrt(std::max(0.0, inner(f_eval, f_eval)));
  }
};

/// Mean of per-sample Euclidean norms, (1/N) sum_i ||row_i||.
double mean_row_norm(const MatrixXd& rows);

// CSV with header x_0..x_{K-1}, y_0..y_{K-1}[, c_.., e_..] plus a JSON
// manifest naming dimensions and N.
void save_dataset_csv(const DataSet& data, const std::string& csv_path);
void save_dataset_manifest(const DataSet& data, const std::string& json_path);
DataSet load_dataset_csv(const std::string& csv_path);

}  // namespace modcomb
