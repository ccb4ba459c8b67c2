#include "modcomb/mpc.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <random>

#include <Eigen/Eigenvalues>
#include <nlohmann/json.hpp>

namespace modcomb::mpc {

namespace {

constexpr double kKktTol = 1e-8;

VectorXd clamp_box(const VectorXd& u, const VectorXd& lo, const VectorXd& hi) {
  return u.cwiseMax(lo).cwiseMin(hi);
}

/// Design dataset whose inputs concatenate [x; c; e] so the generic
/// least-squares learners can regress on all three.
DataSet joint_design(const DataSet& data, const MatrixXd& lifted_targets) {
  MatrixXd inputs(data.size(),
                  data.state_dim() + data.controls.cols() +
                      data.externals.cols());
  inputs << data.inputs, data.controls, data.externals;
  return make_dataset(std::move(inputs), lifted_targets);
}

FeatureMap slice_map(Eigen::Index dim_in, Eigen::Index offset,
                     Eigen::Index len, const std::string& label) {
  FeatureMap map;
  map.dim_in = dim_in;
  map.dim_out = len;
  map.label = label;
  map.evaluator = [offset, len](const VectorXd& v) -> VectorXd {
    return v.segment(offset, len);
  };
  return map;
}

/// phi(param(v)) (x) value(v): feature j*q + l is phi_j * value_l.  Both
/// param_slice and value_map act on the full joint [x; c; e] input.
FeatureMap kron_map(const FeatureMap& param_slice, const FeatureMap& phi,
                    const FeatureMap& value_map, const std::string& label) {
  FeatureMap map;
  map.dim_in = param_slice.dim_in;
  map.dim_out = phi.dim_out * value_map.dim_out;
  map.label = label;
  map.evaluator = [param_slice, phi, value_map](const VectorXd& v) {
    const VectorXd f = phi(param_slice(v));
    const VectorXd z = value_map(v);
    VectorXd out(f.size() * z.size());
    for (Eigen::Index j = 0; j < f.size(); ++j)
      out.segment(j * z.size(), z.size()) = f(j) * z;
    return out;
  };
  return map;
}

std::vector<MatrixXd> split_terms(const MatrixXd& coeffs, Eigen::Index q,
                                  Eigen::Index block_cols) {
  require(coeffs.cols() == q * block_cols, "operator coefficient shape");
  std::vector<MatrixXd> terms(q);
  for (Eigen::Index j = 0; j < q; ++j)
    terms[j] = coeffs.middleCols(j * block_cols, block_cols);
  return terms;
}

const FeatureModel& as_feature_model(const Model& model) {
  const auto* handle = dynamic_cast<const FeatureModelHandle*>(&model);
  require(handle != nullptr, "expected a feature-space model");
  return handle->model();
}

// ---- convex horizon QP ---------------------------------------------------

struct StackedQP {
  MatrixXd h;        // hessian/2 of the cost in stacked controls
  VectorXd g;        // linear term/2
  double constant = 0.0;
};

StackedQP build_qp(const LiftedPredictor& pred, const MPCProblem& prob,
                   const VectorXd& z0, int step) {
  const Eigen::Index p = pred.lifted_dim();
  const Eigen::Index m = prob.r.rows();
  const int h = prob.horizon;

  MatrixXd s = MatrixXd::Zero(static_cast<Eigen::Index>(h) * p,
                              static_cast<Eigen::Index>(h) * m);
  VectorXd base(static_cast<Eigen::Index>(h) * p);
  VectorXd zbar = z0;
  MatrixXd sens = MatrixXd::Zero(p, static_cast<Eigen::Index>(h) * m);
  for (int k = 0; k < h; ++k) {
    MatrixXd a, b;
    VectorXd d = VectorXd::Zero(p);
    const VectorXd e = prob.external_forecast.row(step + k).transpose();
    switch (pred.structure) {
      case Structure::kLinear:
        a = pred.k_const;
        b = pred.b_const;
        d = pred.d_const;
        break;
      case Structure::kHybrid1:
        a = pred.k_param.evaluate(e);
        b = pred.b_const;
        break;
      case Structure::kHybrid2:
        a = pred.k_const;
        b = pred.b_param.evaluate(e);
        break;
      default:
        throw Error("nonlinear structure has no stacked QP form");
    }
    sens = a * sens;
    sens.middleCols(static_cast<Eigen::Index>(k) * m, m) = b;
    zbar = a * zbar + d;
    s.middleRows(static_cast<Eigen::Index>(k) * p, p) = sens;
    base.segment(static_cast<Eigen::Index>(k) * p, p) =
        zbar - prob.z_ref.row(step + k + 1).transpose();
  }

  StackedQP qp;
  qp.h = MatrixXd::Zero(static_cast<Eigen::Index>(h) * m,
                        static_cast<Eigen::Index>(h) * m);
  qp.g = VectorXd::Zero(static_cast<Eigen::Index>(h) * m);
  for (int k = 0; k < h; ++k) {
    const auto rows = s.middleRows(static_cast<Eigen::Index>(k) * p, p);
    const auto bk = base.segment(static_cast<Eigen::Index>(k) * p, p);
    qp.h += rows.transpose() * prob.q * rows;
    qp.g += rows.transpose() * (prob.q * bk);
    qp.constant += bk.dot(prob.q * bk);
    qp.h.block(static_cast<Eigen::Index>(k) * m,
               static_cast<Eigen::Index>(k) * m, m, m) += prob.r;
  }
  return qp;
}

double qp_kkt_residual(const StackedQP& qp, const VectorXd& u,
                       const VectorXd& lo, const VectorXd& hi) {
  const VectorXd grad = 2.0 * (qp.h * u + qp.g);
  return (u - clamp_box(u - grad, lo, hi)).lpNorm<Eigen::Infinity>();
}

VectorXd solve_box_qp(const StackedQP& qp, const VectorXd& lo,
                      const VectorXd& hi, double* kkt_out) {
  const Eigen::Index n = qp.g.size();
  VectorXd u = clamp_box(VectorXd::Zero(n), lo, hi);
  double kkt = qp_kkt_residual(qp, u, lo, hi);
  for (int sweep = 0; sweep < 200000 && kkt > 1e-10; ++sweep) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double grad_i = qp.h.row(i).dot(u) + qp.g(i);
      const double quad = qp.h(i, i);
      if (quad > 1e-14) {
        u(i) = std::clamp(u(i) - grad_i / quad, lo(i), hi(i));
      } else if (grad_i > 0.0) {
        u(i) = lo(i);
      } else if (grad_i < 0.0) {
        u(i) = hi(i);
      }
    }
    kkt = qp_kkt_residual(qp, u, lo, hi);
  }
  *kkt_out = kkt;
  require(kkt <= kKktTol, "horizon QP did not reach the KKT tolerance");
  return u;
}

// ---- nonlinear horizon solve --------------------------------------------

double nonlinear_cost(const LiftedPredictor& pred, const MPCProblem& prob,
                      const VectorXd& z0, int step, const VectorXd& u) {
  const Eigen::Index m = prob.r.rows();
  VectorXd z = z0;
  double cost = 0.0;
  for (int k = 0; k < prob.horizon; ++k) {
    const VectorXd c = u.segment(static_cast<Eigen::Index>(k) * m, m);
    const VectorXd e = prob.external_forecast.row(step + k).transpose();
    z = predict_lifted(pred, z, c, e);
    const VectorXd dz = z - prob.z_ref.row(step + k + 1).transpose();
    cost += dz.dot(prob.q * dz) + c.dot(prob.r * c);
  }
  return cost;
}

VectorXd fd_gradient(const std::function<double(const VectorXd&)>& f,
                     const VectorXd& u) {
  VectorXd grad(u.size());
  VectorXd v = u;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const double h = 1e-6 * std::max(1.0, std::abs(u(i)));
    v(i) = u(i) + h;
    const double fp = f(v);
    v(i) = u(i) - h;
    const double fm = f(v);
    v(i) = u(i);
    grad(i) = (fp - fm) / (2.0 * h);
  }
  return grad;
}

/// Projected BFGS with backtracking on the projection arc.
VectorXd projected_quasi_newton(const std::function<double(const VectorXd&)>& f,
                                VectorXd u, const VectorXd& lo,
                                const VectorXd& hi, double* value,
                                double* residual) {
  const Eigen::Index n = u.size();
  u = clamp_box(u, lo, hi);
  MatrixXd h_inv = MatrixXd::Identity(n, n);
  double fu = f(u);
  VectorXd grad = fd_gradient(f, u);
  for (int iter = 0; iter < 300; ++iter) {
    const double res = (u - clamp_box(u - grad, lo, hi)).lpNorm<Eigen::Infinity>();
    if (res <= kKktTol) break;
    VectorXd dir = -(h_inv * grad);
    if (dir.dot(grad) >= 0.0) dir = -grad;  // restore descent
    double alpha = 1.0;
    VectorXd u_new = u;
    double f_new = fu;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      u_new = clamp_box(u + alpha * dir, lo, hi);
      f_new = f(u_new);
      if (f_new <= fu - 1e-4 * alpha * grad.dot(u - u_new) ||
          f_new < fu - 1e-14 * std::max(1.0, std::abs(fu))) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;
    const VectorXd grad_new = fd_gradient(f, u_new);
    const VectorXd s = u_new - u;
    const VectorXd y = grad_new - grad;
    const double sy = s.dot(y);
    if (sy > 1e-12) {
      const MatrixXd eye = MatrixXd::Identity(n, n);
      const MatrixXd v = eye - (s * y.transpose()) / sy;
      h_inv = v * h_inv * v.transpose() + (s * s.transpose()) / sy;
    }
    u = u_new;
    fu = f_new;
    grad = grad_new;
  }
  *value = fu;
  *residual = (u - clamp_box(u - grad, lo, hi)).lpNorm<Eigen::Infinity>();
  return u;
}

}  // namespace

std::string to_string(Structure s) {
  switch (s) {
    case Structure::kLinear: return "linear";
    case Structure::kHybrid1: return "hybrid1";
    case Structure::kHybrid2: return "hybrid2";
    case Structure::kNonlinear: return "nonlinear";
  }
  throw Error("invalid structure tag");
}

Structure structure_from_string(const std::string& name) {
  if (name == "linear") return Structure::kLinear;
  if (name == "hybrid1") return Structure::kHybrid1;
  if (name == "hybrid2") return Structure::kHybrid2;
  if (name == "nonlinear") return Structure::kNonlinear;
  throw Error("unknown predictor structure '" + name + "'");
}

MatrixXd ParametricOperator::evaluate(const VectorXd& v) const {
  require(!terms.empty(), "parametric operator has no terms");
  const VectorXd f = basis(v);
  require_dim(static_cast<Eigen::Index>(terms.size()), f.size(),
              "parametric operator basis");
  MatrixXd out = MatrixXd::Zero(terms[0].rows(), terms[0].cols());
  for (size_t j = 0; j < terms.size(); ++j) out += f(j) * terms[j];
  return out;
}

VectorXd ParametricOperator::apply(const VectorXd& v, const VectorXd& z) const {
  require(!terms.empty(), "parametric operator has no terms");
  const VectorXd f = basis(v);
  require_dim(static_cast<Eigen::Index>(terms.size()), f.size(),
              "parametric operator basis");
  VectorXd out = VectorXd::Zero(terms[0].rows());
  for (size_t j = 0; j < terms.size(); ++j) out.noalias() += f(j) * (terms[j] * z);
  return out;
}

void LiftedPredictor::validate() const {
  const Eigen::Index p = lifted_dim();
  switch (structure) {
    case Structure::kLinear:
      require(k_const.rows() == p && k_const.cols() == p &&
                  b_const.rows() == p && b_const.cols() == control_dim &&
                  d_const.size() == p,
              "linear predictor blocks not conformable");
      break;
    case Structure::kHybrid1:
      require(!k_param.empty() && k_param.terms[0].rows() == p &&
                  k_param.terms[0].cols() == p && b_const.rows() == p &&
                  b_const.cols() == control_dim,
              "hybrid1 predictor blocks not conformable");
      break;
    case Structure::kHybrid2:
      require(k_const.rows() == p && k_const.cols() == p &&
                  !b_param.empty() && b_param.terms[0].rows() == p &&
                  b_param.terms[0].cols() == control_dim,
              "hybrid2 predictor blocks not conformable");
      break;
    case Structure::kNonlinear:
      require(!k_param.empty() && k_param.terms[0].rows() == p &&
                  k_param.terms[0].cols() == p,
              "nonlinear predictor blocks not conformable");
      break;
  }
}

FeatureMap default_external_basis() {
  FeatureMap map;
  map.dim_in = 1;
  map.dim_out = 2;
  map.label = "[1, sin e]";
  map.evaluator = [](const VectorXd& e) {
    VectorXd out(2);
    out << 1.0, std::sin(e(0));
    return out;
  };
  return map;
}

FeatureMap default_joint_basis(Eigen::Index control_dim) {
  FeatureMap map;
  map.dim_in = 1 + control_dim;
  map.dim_out = 2 + 2 * control_dim;
  map.label = "[1, sin e, c, c sin e]";
  map.evaluator = [control_dim](const VectorXd& v) {
    const double se = std::sin(v(0));
    VectorXd out(2 + 2 * control_dim);
    out(0) = 1.0;
    out(1) = se;
    out.segment(2, control_dim) = v.tail(control_dim);
    out.tail(control_dim) = se * v.tail(control_dim);
    return out;
  };
  return map;
}

LiftedPredictor fit_predictor(const PredictorSpec& spec, const DataSet& data,
                              FitReport* report) {
  data.validate();
  require(data.has_controls(), "predictor fitting requires control inputs");
  const bool needs_external = spec.structure != Structure::kLinear;
  require(!needs_external || data.has_externals(),
          "this predictor structure requires external inputs");

  const koopman::Dictionary& dict = spec.dictionary;
  const Eigen::Index p = dict.lifted_dim();
  const Eigen::Index k = data.state_dim();
  const Eigen::Index m = data.controls.cols();
  const Eigen::Index me = data.externals.cols();
  require_dim(dict.state_dim, k, "dictionary state");

  MatrixXd lifted_targets(data.size(), p);
  for (Eigen::Index i = 0; i < data.size(); ++i)
    lifted_targets.row(i) = dict.lift(data.targets.row(i).transpose());
  const DataSet design = joint_design(data, lifted_targets);
  const Eigen::Index din = design.state_dim();

  const FeatureMap psi = dict.map;
  const FeatureMap c_slice = slice_map(din, k, m, "control slice");
  const FeatureMap e_slice = slice_map(din, k + m, me, "external slice");
  const FeatureMap ec_slice = slice_map(din, k, 0, "unused");

  LiftedPredictor pred;
  pred.structure = spec.structure;
  pred.dictionary = dict;
  pred.control_dim = m;
  pred.external_dim = me;

  FitReport local;
  FitReport& rep = report != nullptr ? *report : local;

  auto lift_slice = [psi, k, din]() {
    FeatureMap map;
    map.dim_in = din;
    map.dim_out = psi.dim_out;
    map.label = "psi(x)";
    map.evaluator = [psi, k](const VectorXd& v) { return psi(v.head(k)); };
    return map;
  };

  switch (spec.structure) {
    case Structure::kLinear: {
      FeatureMap joint;
      joint.dim_in = din;
      joint.dim_out = p + m;
      joint.label = "[psi(x); c]";
      joint.evaluator = [psi, k, m](const VectorXd& v) {
        VectorXd out(psi.dim_out + m);
        out.head(psi.dim_out) = psi(v.head(k));
        out.tail(m) = v.segment(k, m);
        return out;
      };
      const FeatureModel fit = fit_projection(design, joint);
      pred.k_const = fit.coefficients.leftCols(p);
      pred.b_const = fit.coefficients.rightCols(m);
      pred.d_const = VectorXd::Zero(p);  // constant lives in psi's first entry
      rep.residual_norm = model_residual_norm(design, fit);
      break;
    }
    case Structure::kHybrid1: {
      const FeatureMap& phi = spec.external_basis;
      require_dim(me, phi.dim_in, "external basis input");
      const FeatureMap g_map =
          kron_map(e_slice, phi, lift_slice(), "phi(e) x psi(x)");
      LinearLearner learner_g(g_map);
      LinearLearner learner_h(c_slice);
      rep.combiner_state = combiner::iterate(design, learner_g, learner_h,
                                             spec.combiner_config);
      rep.used_combiner = true;
      rep.residual_norm = rep.combiner_state.last().residual_norm;
      const FeatureModel& mg = as_feature_model(*rep.combiner_state.model_first);
      const FeatureModel& mh =
          as_feature_model(*rep.combiner_state.model_second);
      pred.k_param.basis = phi;
      pred.k_param.terms = split_terms(mg.coefficients, phi.dim_out, p);
      pred.b_const = mh.coefficients;
      break;
    }
    case Structure::kHybrid2: {
      const FeatureMap& phi = spec.external_basis;
      require_dim(me, phi.dim_in, "external basis input");
      const FeatureMap h_map =
          kron_map(e_slice, phi, c_slice, "phi(e) x c");
      LinearLearner learner_g(lift_slice());
      LinearLearner learner_h(h_map);
      rep.combiner_state = combiner::iterate(design, learner_g, learner_h,
                                             spec.combiner_config);
      rep.used_combiner = true;
      rep.residual_norm = rep.combiner_state.last().residual_norm;
      const FeatureModel& mg = as_feature_model(*rep.combiner_state.model_first);
      const FeatureModel& mh =
          as_feature_model(*rep.combiner_state.model_second);
      pred.k_const = mg.coefficients;
      pred.b_param.basis = phi;
      pred.b_param.terms = split_terms(mh.coefficients, phi.dim_out, m);
      break;
    }
    case Structure::kNonlinear: {
      const FeatureMap& phi = spec.joint_basis;
      require_dim(me + m, phi.dim_in, "joint basis input");
      FeatureMap ec;
      ec.dim_in = din;
      ec.dim_out = me + m;
      ec.label = "[e; c]";
      ec.evaluator = [k, m, me](const VectorXd& v) {
        VectorXd out(me + m);
        out.head(me) = v.tail(me);
        out.tail(m) = v.segment(k, m);
        return out;
      };
      const FeatureMap joint =
          kron_map(ec, phi, lift_slice(), "phi(e,c) x psi(x)");
      const FeatureModel fit = fit_projection(design, joint);
      pred.k_param.basis = phi;
      pred.k_param.terms = split_terms(fit.coefficients, phi.dim_out, p);
      rep.residual_norm = model_residual_norm(design, fit);
      break;
    }
  }
  (void)ec_slice;
  pred.validate();
  return pred;
}

VectorXd predict_lifted(const LiftedPredictor& pred, const VectorXd& z,
                        const VectorXd& c, const VectorXd& e) {
  require_dim(pred.lifted_dim(), z.size(), "lifted state");
  require_dim(pred.control_dim, c.size(), "control");
  if (pred.structure != Structure::kLinear)
    require_dim(pred.external_dim, e.size(), "external input");
  switch (pred.structure) {
    case Structure::kLinear:
      return pred.k_const * z + pred.b_const * c + pred.d_const;
    case Structure::kHybrid1:
      return pred.k_param.apply(e, z) + pred.b_const * c;
    case Structure::kHybrid2:
      return pred.k_const * z + pred.b_param.apply(e, c);
    case Structure::kNonlinear: {
      VectorXd ec(e.size() + c.size());
      ec << e, c;
      return pred.k_param.apply(ec, z);
    }
  }
  throw Error("invalid structure tag");
}

void MPCProblem::validate(Eigen::Index lifted_dim,
                          Eigen::Index control_dim) const {
  require(horizon >= 1, "horizon must be >= 1");
  require(q.rows() == lifted_dim && q.cols() == lifted_dim,
          "Q must match the lifted dimension");
  require(r.rows() == control_dim && r.cols() == control_dim,
          "R must match the control dimension");
  require((q - q.transpose()).norm() < 1e-10 &&
              (r - r.transpose()).norm() < 1e-10,
          "Q and R must be symmetric");
  require(lower.size() == control_dim && upper.size() == control_dim,
          "control bounds must match the control dimension");
  require((lower.array() <= upper.array()).all(), "infeasible control bounds");
  require(z_ref.cols() == lifted_dim, "z_ref must live in lifted coordinates");
}

HorizonSolution solve_horizon(const LiftedPredictor& pred,
                              const MPCProblem& problem, const VectorXd& z0,
                              int step_index, const VectorXd* warm_start) {
  problem.validate(pred.lifted_dim(), pred.control_dim);
  require(step_index >= 0, "step index must be non-negative");
  require(problem.external_forecast.rows() >= step_index + problem.horizon,
          "external forecast too short for the horizon");
  require(problem.z_ref.rows() >= step_index + problem.horizon + 1,
          "reference trajectory too short for the horizon");
  const Eigen::Index m = pred.control_dim;
  const int h = problem.horizon;
  const Eigen::Index n = static_cast<Eigen::Index>(h) * m;
  VectorXd lo(n), hi(n);
  for (int kk = 0; kk < h; ++kk) {
    lo.segment(static_cast<Eigen::Index>(kk) * m, m) = problem.lower;
    hi.segment(static_cast<Eigen::Index>(kk) * m, m) = problem.upper;
  }

  HorizonSolution sol;
  if (pred.structure != Structure::kNonlinear) {
    const StackedQP qp = build_qp(pred, problem, z0, step_index);
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(2.0 * qp.h,
                                                Eigen::EigenvaluesOnly);
    sol.hessian_min_eig = eig.eigenvalues().minCoeff();
    const VectorXd u = solve_box_qp(qp, lo, hi, &sol.kkt_residual);
    sol.controls = Eigen::Map<const MatrixXd>(u.data(), m, h).transpose();
    sol.cost = u.dot(qp.h * u) + 2.0 * qp.g.dot(u) + qp.constant;
    sol.convex = true;
    return sol;
  }

  auto cost = [&](const VectorXd& u) {
    return nonlinear_cost(pred, problem, z0, step_index, u);
  };
  std::mt19937_64 rng(0x9E3779B97F4A7C15ULL ^
                      static_cast<std::uint64_t>(step_index));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double best_value = std::numeric_limits<double>::infinity();
  VectorXd best_u;
  double best_res = 0.0;
  int agreements = 0;
  auto try_start = [&](const VectorXd& u0) {
    double value = 0.0, res = 0.0;
    const VectorXd u = projected_quasi_newton(cost, u0, lo, hi, &value, &res);
    const double tol = std::isfinite(best_value)
                           ? 1e-9 * std::max(1.0, std::abs(best_value))
                           : 0.0;
    if (value < best_value - tol) {
      best_value = value;
      best_u = u;
      best_res = res;
      agreements = 1;
    } else if (value <= best_value + tol) {
      ++agreements;
    }
  };
  if (warm_start != nullptr && warm_start->size() == n)
    try_start(clamp_box(*warm_start, lo, hi));
  for (int start = 0; start < 5; ++start) {
    // Two independent starts landing on the same optimum is taken as
    // confirmation; otherwise all five restarts run.
    if (agreements >= 2 && best_res <= kKktTol) break;
    VectorXd u0(n);
    if (start == 0) {
      u0 = clamp_box(VectorXd::Zero(n), lo, hi);
    } else {
      for (Eigen::Index i = 0; i < n; ++i)
        u0(i) = lo(i) + unit(rng) * (hi(i) - lo(i));
    }
    try_start(u0);
  }
  sol.controls = Eigen::Map<const MatrixXd>(best_u.data(), m, h).transpose();
  sol.cost = best_value;
  sol.convex = false;
  sol.kkt_residual = best_res;
  return sol;
}

TrackingResult run_mpc(const LiftedPredictor& pred, const MPCProblem& problem,
                       const VectorXd& x0, int n_steps,
                       const TrueSystem& true_system) {
  require(n_steps >= 1, "n_steps must be >= 1");
  const Eigen::Index k = pred.dictionary.state_dim;
  require_dim(k, x0.size(), "initial state");
  const Eigen::Index m = pred.control_dim;

  TrackingResult result;
  result.structure = pred.structure;
  result.states.resize(n_steps + 1, k);
  result.controls.resize(n_steps, m);
  result.solve_time_ms.resize(n_steps);
  result.states.row(0) = x0.transpose();

  VectorXd x = x0;
  VectorXd warm;
  for (int n = 0; n < n_steps; ++n) {
    const VectorXd z = pred.dictionary.lift(x);
    const auto t0 = std::chrono::steady_clock::now();
    HorizonSolution sol;
    try {
      sol = solve_horizon(pred, problem, z, n,
                          warm.size() > 0 ? &warm : nullptr);
    } catch (const Error& err) {
      throw Error("horizon solve failed at step " + std::to_string(n) + ": " +
                  err.what());
    }
    const auto t1 = std::chrono::steady_clock::now();
    result.solve_time_ms(n) =
        std::chrono::duration<double, std::milli>(t1 - t0).count();
    if (!std::isnan(sol.hessian_min_eig) &&
        !(sol.hessian_min_eig >= result.min_hessian_eig))
      result.min_hessian_eig = sol.hessian_min_eig;
    // Shift-by-one warm start for the next step's horizon solve.
    const int h = problem.horizon;
    warm.resize(static_cast<Eigen::Index>(h) * m);
    for (int kk = 0; kk < h; ++kk)
      warm.segment(static_cast<Eigen::Index>(kk) * m, m) =
          sol.controls.row(std::min(kk + 1, h - 1)).transpose();
    const VectorXd c = sol.controls.row(0).transpose();
    const VectorXd e = problem.external_forecast.row(n).transpose();
    x = true_system(x, c, e);
    require(x.allFinite(),
            "true system produced a non-finite state at step " +
                std::to_string(n));
    result.controls.row(n) = c.transpose();
    result.states.row(n + 1) = x.transpose();
  }

  // Tracking error against the state block of the lifted reference.
  MatrixXd ref(n_steps + 1, k);
  for (int n = 0; n <= n_steps; ++n)
    ref.row(n) = problem.z_ref.row(n).segment(1, k);
  std::vector<Eigen::Index> tracked(k);
  for (Eigen::Index i = 0; i < k; ++i) tracked[static_cast<size_t>(i)] = i;
  try {
    result.mean_error = mean_tracking_error(result.states, ref, tracked);
  } catch (const Error&) {
    // reference degenerate on some coordinate; leave NaN
  }
  return result;
}

double mean_tracking_error(const MatrixXd& states, const MatrixXd& ref,
                           const std::vector<Eigen::Index>& tracked) {
  require(states.rows() == ref.rows() && states.cols() == ref.cols(),
          "trajectory shape mismatch");
  require(!tracked.empty(), "no tracked coordinates");
  double sum = 0.0;
  for (Eigen::Index i : tracked) {
    require(i >= 0 && i < states.cols(), "tracked index out of range");
    const double denom = ref.col(i).cwiseAbs().maxCoeff();
    require(denom > 0.0, "reference coordinate is identically zero");
    sum += (states.col(i) - ref.col(i)).cwiseAbs().maxCoeff() / denom;
  }
  return sum / static_cast<double>(tracked.size());
}

void save_tracking_csv(const TrackingResult& result, const std::string& path) {
  std::ofstream out(path);
  require(out.good(), "cannot open " + path + " for writing");
  out << "step";
  for (Eigen::Index j = 0; j < result.states.cols(); ++j) out << ",x_" << j;
  for (Eigen::Index j = 0; j < result.controls.cols(); ++j) out << ",c_" << j;
  out << ",solve_time_ms\n";
  char buf[64];
  for (Eigen::Index n = 0; n < result.controls.rows(); ++n) {
    out << n;
    for (Eigen::Index j = 0; j < result.states.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.12g", result.states(n, j));
      out << "," << buf;
    }
    for (Eigen::Index j = 0; j < result.controls.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.12g", result.controls(n, j));
      out << "," << buf;
    }
    std::snprintf(buf, sizeof(buf), "%.12g", result.solve_time_ms(n));
    out << "," << buf << "\n";
  }
}

void save_tracking_summary_json(const TrackingResult& result,
                                const std::string& path) {
  VectorXd times = result.solve_time_ms;
  std::sort(times.data(), times.data() + times.size());
  const Eigen::Index n = times.size();
  const double median =
      n == 0 ? 0.0
             : (n % 2 == 1 ? times(n / 2)
                           : 0.5 * (times(n / 2 - 1) + times(n / 2)));
  nlohmann::ordered_json j;
  j["structure"] = to_string(result.structure);
  j["mean_tracking_error"] = result.mean_error;
  j["median_solve_time"] = median;
  std::ofstream out(path);
  require(out.good(), "cannot open " + path + " for writing");
  out << j.dump(2) << "\n";
}

}  // namespace modcomb::mpc
