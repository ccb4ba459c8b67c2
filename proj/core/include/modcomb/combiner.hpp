#pragma once

#include <limits>
#include <vector>

#include "modcomb/learner.hpp"

namespace modcomb::combiner {

using modcomb::DataSet;
using modcomb::InnerProductContext;
using modcomb::Learner;
using modcomb::MatrixXd;
using modcomb::Model;

enum class StoppingCriterion {
  kPredictionError,       // (1/N) sum ||y_i^n - y_i|| < eps
  kSuccessiveDifference,  // (1/N) sum ||y_i^n - y_i^{n-1}|| < eps
};

struct CombinationConfig {
  double epsilon = 1e-8;
  bool epsilon_relative = true;  // threshold scales with ||F||_D
  int max_iterations = 500;
  StoppingCriterion criterion = StoppingCriterion::kPredictionError;
  bool accelerate = false;
  bool zero_init = false;  // ablation: start from F_H^0 = 0 instead of P_H(F)
};

struct IterationRecord {
  int n = 0;
  double residual_norm = 0.0;  // mean per-sample prediction error
  double successive_difference = std::numeric_limits<double>::quiet_NaN();
  double residual_d_norm = 0.0;  // ||F - F^n||_D
  double successive_d_norm = std::numeric_limits<double>::quiet_NaN();
  double t_f = std::numeric_limits<double>::quiet_NaN();
  double oracle_distance = std::numeric_limits<double>::quiet_NaN();
};

struct CombinationState {
  std::shared_ptr<Model> model_first;   // fitted in the first role (F_G)
  std::shared_ptr<Model> model_second;  // fitted in the second role (F_H)
  int iterations = 0;
  bool stopped_by_criterion = false;
  bool stagnation_warning = false;
  std::vector<IterationRecord> history;

  std::shared_ptr<Model> combined() const {
    return std::make_shared<modcomb::CombinedModel>(model_first, model_second);
  }
  const IterationRecord& last() const {
    modcomb::require(!history.empty(), "no iterations recorded");
    return history.back();
  }
};

/// Optimal relaxation parameter for the residual update
/// r_prev + t (r_curr - r_prev); arguments are residual evaluations on the
/// reference dataset.
double compute_t_f(const MatrixXd& r_prev, const MatrixXd& r_curr,
                   const InnerProductContext& ctx);

/// Single-pass baseline: fit the first learner on F, then correct the
/// leftover with the second learner.  No iteration.
CombinationState residual_learning(const DataSet& data, const Learner& first,
                                   const Learner& second);

/// Iterative model combination.  Each iteration n records the combined
/// model F^n = F_first^n + F_second^n where the first learner was refit
/// against the newest second-learner residual.  oracle_eval, when given,
/// is an evaluation matrix whose distance to F^n is logged per iteration.
CombinationState iterate(const DataSet& data, const Learner& learner_g,
                         const Learner& learner_h,
                         const CombinationConfig& config,
                         const MatrixXd* oracle_eval = nullptr);

/// Acceleration scheme: after each full refit the combination is relaxed
/// by t_F towards its previous iterate (both component models blended), so
/// the recombined residual is exactly r_prev + t_F (r_curr - r_prev); the
/// stopping criterion is evaluated after the relaxation.
CombinationState iterate_accelerated(const DataSet& data,
                                     const Learner& learner_g,
                                     const Learner& learner_h,
                                     const CombinationConfig& config,
                                     const MatrixXd* oracle_eval = nullptr);

struct StoppingDecision {
  bool stop = false;
  double value = 0.0;
};

StoppingDecision check_stopping(const CombinationState& state,
                                const DataSet& data,
                                const CombinationConfig& config);

/// Iteration history export, columns n, residual_norm,
/// successive_difference, t_F.
void save_history_csv(const CombinationState& state, const std::string& path);

}  // namespace modcomb::combiner
