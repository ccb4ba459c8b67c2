#pragma once

#include <functional>
#include <string>
#include <vector>

#include "modcomb/combiner.hpp"
#include "modcomb/koopman.hpp"

namespace modcomb::mpc {

using modcomb::DataSet;
using modcomb::FeatureMap;
using modcomb::MatrixXd;
using modcomb::VectorXd;

enum class Structure { kLinear, kHybrid1, kHybrid2, kNonlinear };

std::string to_string(Structure s);
Structure structure_from_string(const std::string& name);

/// Operator-valued map K(v) = sum_j phi_j(v) K^j over a fixed feature basis
/// phi on the parameter v (the external input, or the joint (e, c) vector
/// for the nonlinear structure).
struct ParametricOperator {
  FeatureMap basis;             // v -> R^q
  std::vector<MatrixXd> terms;  // q blocks, all the same shape

  bool empty() const { return terms.empty(); }
  MatrixXd evaluate(const VectorXd& v) const;
  /// Action of evaluate(v) on z without materializing the operator.
  VectorXd apply(const VectorXd& v, const VectorXd& z) const;
};

/// One-step predictor in lifted coordinates z = Psi(x).  The update rule
/// depends on the structure tag:
///   linear:    z+ = K z + B c + d
///   hybrid1:   z+ = K(e) z + B c
///   hybrid2:   z+ = K z + B(e) c
///   nonlinear: z+ = K(e, c) z
struct LiftedPredictor {
  Structure structure = Structure::kLinear;
  koopman::Dictionary dictionary;
  Eigen::Index control_dim = 0;
  Eigen::Index external_dim = 0;

  MatrixXd k_const;            // p x p (linear, hybrid2)
  MatrixXd b_const;            // p x m_c (linear, hybrid1)
  VectorXd d_const;            // p affine offset (linear)
  ParametricOperator k_param;  // K(e) / K(e,c) (hybrid1, nonlinear)
  ParametricOperator b_param;  // B(e) (hybrid2)

  Eigen::Index lifted_dim() const { return dictionary.map.dim_out; }
  void validate() const;
};

struct PredictorSpec {
  Structure structure = Structure::kLinear;
  koopman::Dictionary dictionary;
  FeatureMap external_basis;  // phi(e), hybrid structures
  FeatureMap joint_basis;     // phi([e; c]), nonlinear structure
  combiner::CombinationConfig combiner_config{
      .epsilon = 1e-10, .max_iterations = 200, .accelerate = false};
};

/// Default external feature basis [1, sin e] for scalar e.
FeatureMap default_external_basis();

/// Default joint basis on [e; c] for scalar e and m_c controls:
/// [1, sin e, c_1..c_m, c_1 sin e .. c_m sin e].
FeatureMap default_joint_basis(Eigen::Index control_dim);

struct FitReport {
  combiner::CombinationState combiner_state;  // populated for hybrids
  double residual_norm = 0.0;                 // mean row norm in lifted coords
  bool used_combiner = false;
};

LiftedPredictor fit_predictor(const PredictorSpec& spec, const DataSet& data,
                              FitReport* report = nullptr);

VectorXd predict_lifted(const LiftedPredictor& pred, const VectorXd& z,
                        const VectorXd& c, const VectorXd& e);

/// Receding-horizon problem data.  z_ref and external_forecast are indexed
/// by absolute closed-loop step; solve_horizon(step n) reads references
/// n+1..n+h and externals n..n+h-1.
struct MPCProblem {
  int horizon = 5;
  MatrixXd q;  // p x p, PSD weight on the lifted state
  MatrixXd r;  // m_c x m_c, PSD weight on the control
  VectorXd lower;
  VectorXd upper;
  MatrixXd z_ref;              // rows: absolute steps
  MatrixXd external_forecast;  // rows: absolute steps

  void validate(Eigen::Index lifted_dim, Eigen::Index control_dim) const;
};

struct HorizonSolution {
  MatrixXd controls;  // h x m_c
  double cost = 0.0;
  bool convex = false;
  double kkt_residual = 0.0;
  // smallest eigenvalue of the stacked-control Hessian; the convexity
  // certificate for linear/hybrid structures (NaN for nonlinear)
  double hessian_min_eig = std::numeric_limits<double>::quiet_NaN();
};

/// Open-loop optimal control over the horizon.  Linear/hybrid structures
/// give a convex box-constrained QP in the stacked controls, solved to KKT
/// residual <= 1e-8 (global optimum); the nonlinear structure is handled by
/// a projected quasi-Newton method from 5 deterministic restarts, returning
/// the best local optimum with convex = false.  An optional warm start
/// (stacked controls, typically the previous step's shifted solution) is
/// tried before the restarts; the restart loop exits early once two starts
/// agree on the same optimum.
HorizonSolution solve_horizon(const LiftedPredictor& pred,
                              const MPCProblem& problem, const VectorXd& z0,
                              int step_index,
                              const VectorXd* warm_start = nullptr);

using TrueSystem =
    std::function<VectorXd(const VectorXd& x, const VectorXd& c,
                           const VectorXd& e)>;

struct TrackingResult {
  Structure structure = Structure::kLinear;
  MatrixXd states;         // (N+1) x K closed-loop states
  MatrixXd controls;       // N x m_c applied (first) controls
  VectorXd solve_time_ms;  // N per-step horizon-solve wall times
  double mean_error = std::numeric_limits<double>::quiet_NaN();
  // smallest Hessian eigenvalue seen across all horizon solves (convex
  // structures only; NaN for nonlinear)
  double min_hessian_eig = std::numeric_limits<double>::quiet_NaN();
};

/// Closed loop: lift the current state, solve the horizon, apply only the
/// first control to the true system, repeat.  The external input at step n
/// is problem.external_forecast row n.  mean_error is computed against the
/// state block of z_ref over all state coordinates.
TrackingResult run_mpc(const LiftedPredictor& pred, const MPCProblem& problem,
                       const VectorXd& x0, int n_steps,
                       const TrueSystem& true_system);

/// Average over the tracked coordinates i of
/// max_n |x_i(n) - ref_i(n)| / max_n |ref_i(n)|.
double mean_tracking_error(const MatrixXd& states, const MatrixXd& ref,
                           const std::vector<Eigen::Index>& tracked);

/// CSV `step, state..., control..., solve_time_ms`, one row per closed-loop
/// step with the pre-step state.
void save_tracking_csv(const TrackingResult& result, const std::string& path);

/// JSON {structure, mean_tracking_error, median_solve_time}.
void save_tracking_summary_json(const TrackingResult& result,
                                const std::string& path);

}  // namespace modcomb::mpc
