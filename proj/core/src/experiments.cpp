#include "modcomb/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>

#include <Eigen/QR>
#include <nlohmann/json.hpp>

#include "modcomb/combiner.hpp"
#include "modcomb/diagnostics.hpp"
#include "modcomb/koopman.hpp"
#include "modcomb/mpc.hpp"
#include "modcomb/systems.hpp"

namespace modcomb::experiments {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string fmt12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  require(out.good(), "cannot open " + path + " for writing");
  out << text;
}

void write_json(const std::string& path, const ordered_json& j) {
  write_text(path, j.dump(2) + "\n");
}

std::string nu_tag(double nu) {
  std::string tag = fmt12(nu);
  for (char& ch : tag) {
    if (ch == '-') ch = 'm';
    if (ch == '.') ch = 'p';
  }
  return tag;
}

FeatureMap constant_map() {
  FeatureMap map;
  map.dim_in = 1;
  map.dim_out = 1;
  map.label = "const";
  map.evaluator = [](const VectorXd&) { return VectorXd::Ones(1); };
  return map;
}

double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size() && x.size() >= 2, "slope needs >= 2 points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double denom = n * sxx - sx * sx;
  require(std::abs(denom) > 0, "degenerate slope fit");
  return (n * sxy - sx * sy) / denom;
}

double median(std::vector<double> v) {
  require(!v.empty(), "median of empty set");
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// ---- toy_suboptimality ---------------------------------------------------

void run_toy(const ExperimentConfig& config) {
  // Function space = scalar functions on two sample points; the evaluation
  // vectors of the two learners span the directions (1,0) and (1,1), the
  // target evaluates to (0, sqrt(2)) so that ||F||_D = 1.
  MatrixXd inputs(2, 1), targets(2, 1);
  inputs << 1.0, 0.0;
  targets << 0.0, std::sqrt(2.0);
  const DataSet data = make_dataset(inputs, targets);

  LinearLearner learner_g(identity_map(1));   // span{(1,0)}
  LinearLearner learner_h(constant_map());    // span{(1,1)}

  auto rl = combiner::residual_learning(data, learner_h, learner_g);
  const double rl_error = rl.last().residual_d_norm;

  combiner::CombinationConfig cc;
  cc.max_iterations = config.toy_max_iterations;
  auto it = combiner::iterate(data, learner_g, learner_h, cc);

  cc.accelerate = true;
  auto acc = combiner::iterate_accelerated(data, learner_g, learner_h, cc);

  const fs::path dir(config.output_dir);
  combiner::save_history_csv(it, (dir / "history_iterative.csv").string());
  combiner::save_history_csv(acc, (dir / "history_accelerated.csv").string());

  std::string table = "method,error\n";
  table += "residual_learning," + fmt12(rl_error) + "\n";
  table += "iterative," + fmt12(it.last().residual_d_norm) + "\n";
  table += "accelerated," + fmt12(acc.last().residual_d_norm) + "\n";
  write_text((dir / "errors.csv").string(), table);

  ordered_json j;
  j["experiment"] = config.experiment;
  j["seed"] = config.seed;
  j["residual_learning_error"] = round_sig12(rl_error);
  j["iterative_error"] = round_sig12(it.last().residual_d_norm);
  j["iterative_iterations"] = it.iterations;
  j["accelerated_error"] = round_sig12(acc.last().residual_d_norm);
  j["accelerated_iterations"] = acc.iterations;
  write_json((dir / "summary.json").string(), j);
}

// ---- nu_rate -------------------------------------------------------------

struct NuResult {
  double nu = 0.0;
  double reference_c = 0.0;
  double measured_c = 0.0;
  double measured_slope = 0.0;
  double reference_slope = 0.0;
  double slope_rel_error = 0.0;
  double final_residual = 0.0;
  int iterations = 0;
  bool slope_defined = false;
  double norm_f = 0.0;            // ||F||_D of the regression targets
  double residual_d_early = 0.0;  // ||F - F^n||_D at record min(2, last)
};

/// Builds the per-site regression problem of the 2D-diffusion rate study:
/// inputs are the five-point neighborhoods [u_W, u_E, u_C, u_S, u_N] and
/// targets the discrete time derivative at the center.  Initial fields are
/// orthonormalized so the empirical subspace geometry matches the
/// closed-form stencil geometry; only sites whose full neighborhood lies in
/// the interior are used.
DataSet build_nu_dataset(const ExperimentConfig& config) {
  systems::Grid2D grid{config.nu_grid_cells, config.nu_dt};
  grid.validate();
  const Eigen::Index m = grid.interior_per_axis();
  const Eigen::Index k_int = grid.interior();

  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  MatrixXd raw(k_int, k_int);
  for (Eigen::Index i = 0; i < k_int; ++i)
    for (Eigen::Index j = 0; j < k_int; ++j) raw(i, j) = unit(rng);
  const MatrixXd q = Eigen::HouseholderQR<MatrixXd>(raw).householderQ() *
                     MatrixXd::Identity(k_int, k_int);

  const Eigen::Index deep = m - 2;  // sites with all four neighbors interior
  const Eigen::Index n_rows = k_int * deep * deep;
  MatrixXd inputs(n_rows, 5), targets(n_rows, 1);
  Eigen::Index row = 0;
  for (Eigen::Index f = 0; f < k_int; ++f) {
    MatrixXd field(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < m; ++j) field(i, j) = q(i * m + j, f);
    const MatrixXd traj = systems::simulate_diffusion_2d(
        grid, config.nu_mu1, config.nu_mu2, field, 1);
    const Eigen::RowVectorXd deriv =
        (traj.row(1) - traj.row(0)) / grid.dt;
    for (Eigen::Index i = 1; i + 1 < m; ++i) {
      for (Eigen::Index j = 1; j + 1 < m; ++j) {
        inputs.row(row) << field(i - 1, j), field(i + 1, j), field(i, j),
            field(i, j - 1), field(i, j + 1);
        targets(row, 0) = deriv(i * m + j);
        ++row;
      }
    }
  }
  return make_dataset(std::move(inputs), std::move(targets));
}

NuResult run_single_nu(const DataSet& data, double nu,
                       const ExperimentConfig& config, const fs::path& dir) {
  VectorXd b1(5), b2(5);
  b1 << 1, 1, -2, 0, 0;
  b2 << 0, 0, -2, 1, 1;

  const FeatureMap map_g = linear_map(b1.transpose(), "b1 stencil");
  const FeatureMap map_h =
      linear_map((nu * b1 + b2).transpose(), "nu b1 + b2 stencil");
  LinearLearner learner_g(map_g);
  LinearLearner learner_h(map_h);

  const FeatureModel oracle =
      diag::joint_projection_oracle(data, map_g, map_h);
  const MatrixXd oracle_eval = oracle.predict_rows(data.inputs);

  combiner::CombinationConfig cc;
  cc.epsilon = 1e-12;
  cc.max_iterations = config.nu_max_iterations;
  const auto state =
      combiner::iterate(data, learner_g, learner_h, cc, &oracle_eval);

  combiner::save_history_csv(
      state, (dir / ("history_nu_" + nu_tag(nu) + ".csv")).string());

  InnerProductContext ctx(data);
  const double scale = ctx.norm(data.targets);

  NuResult res;
  res.nu = nu;
  res.reference_c = diag::closed_form_c_nu(nu);
  res.reference_slope = res.reference_c > 0.0
                            ? std::log(res.reference_c)
                            : -std::numeric_limits<double>::infinity();
  res.final_residual = state.last().residual_d_norm;
  res.iterations = state.iterations;
  res.norm_f = scale;
  const size_t idx =
      std::min<size_t>(2, state.history.size() - 1);
  res.residual_d_early = state.history[idx].residual_d_norm;

  const auto g_basis = diag::orthonormalize(
      {data.inputs * b1}, ctx);
  const auto h_basis = diag::orthonormalize(
      {data.inputs * (nu * b1 + b2)}, ctx);
  const auto angles = diag::min_angle(g_basis, h_basis);
  res.measured_c = angles.c;
  diag::save_angle_report_json(
      angles, (dir / ("angle_nu_" + nu_tag(nu) + ".json")).string());

  std::vector<double> xs, ys;
  for (const auto& rec : state.history) {
    if (std::isnan(rec.oracle_distance)) continue;
    if (rec.oracle_distance <= 1e-12 * std::max(scale, 1e-300)) continue;
    xs.push_back(2.0 * rec.n + 1.0);  // the (2n-1) axis, first iterate n=1
    ys.push_back(std::log(rec.oracle_distance));
  }
  if (xs.size() >= 2) {
    res.measured_slope = ls_slope(xs, ys);
    res.slope_defined = true;
    if (std::isfinite(res.reference_slope) && res.reference_slope != 0.0)
      res.slope_rel_error = std::abs(res.measured_slope - res.reference_slope) /
                            std::abs(res.reference_slope);
  }
  return res;
}

void run_nu_rate(const ExperimentConfig& config) {
  const fs::path dir(config.output_dir);
  const DataSet data = build_nu_dataset(config);

  std::vector<NuResult> results;
  for (double nu : config.nu_values)
    results.push_back(run_single_nu(data, nu, config, dir));
  for (double nu : config.nu_extra_values)
    results.push_back(run_single_nu(data, nu, config, dir));

  std::string table =
      "nu,measured_slope,reference_slope,slope_rel_error,measured_c,"
      "reference_c,final_residual,iterations\n";
  ordered_json runs = ordered_json::array();
  for (const auto& r : results) {
    table += fmt12(r.nu) + "," +
             (r.slope_defined ? fmt12(r.measured_slope) : "nan") + "," +
             fmt12(r.reference_slope) + "," +
             (r.slope_defined ? fmt12(r.slope_rel_error) : "nan") + "," +
             fmt12(r.measured_c) + "," + fmt12(r.reference_c) + "," +
             fmt12(r.final_residual) + "," + std::to_string(r.iterations) +
             "\n";
    ordered_json jr;
    jr["nu"] = round_sig12(r.nu);
    jr["measured_c"] = round_sig12(r.measured_c);
    jr["reference_c"] = round_sig12(r.reference_c);
    if (r.slope_defined) {
      jr["measured_slope"] = round_sig12(r.measured_slope);
      jr["slope_rel_error"] = round_sig12(r.slope_rel_error);
    }
    jr["final_residual"] = round_sig12(r.final_residual);
    jr["iterations"] = r.iterations;
    jr["norm_f"] = round_sig12(r.norm_f);
    jr["residual_d_early"] = round_sig12(r.residual_d_early);
    runs.push_back(jr);
  }
  write_text((dir / "slopes.csv").string(), table);

  ordered_json j;
  j["experiment"] = config.experiment;
  j["seed"] = config.seed;
  j["runs"] = runs;
  write_json((dir / "summary.json").string(), j);
}

// ---- reaction_diffusion --------------------------------------------------

struct RdMethod {
  std::string name;
  std::shared_ptr<Model> model;
  double relative_error = std::numeric_limits<double>::infinity();
};

void run_reaction_diffusion(const ExperimentConfig& config) {
  const fs::path dir(config.output_dir);
  systems::Grid1D grid{config.rd_grid_cells, config.rd_dt};
  grid.validate();
  const Eigen::Index k = grid.interior();
  const auto law = systems::initial_law_from_string(config.rd_initial_law);

  const auto train = systems::generate_rd_trajectories(
      grid, config.rd_mu, config.rd_eta, config.rd_trajectories,
      config.rd_steps, law, config.seed);
  const DataSet data = systems::generate_dataset(train);

  PointwiseLearner learner_g(second_difference_map(k, grid.dz()));
  PointwiseLearner learner_h = koopman::pointwise_dictionary_learner(
      k, config.rd_dictionary_degree);

  std::vector<RdMethod> methods;
  methods.push_back({"linear_regression",
                     learner_g.fit(data, data.targets), 0.0});
  methods.push_back({"koopman", learner_h.fit(data, data.targets), 0.0});

  auto rl = combiner::residual_learning(data, learner_g, learner_h);
  methods.push_back({"residual_learning", rl.combined(), 0.0});

  combiner::CombinationConfig cc;
  cc.epsilon = 1e-10;
  cc.max_iterations = config.rd_max_iterations;
  auto it = combiner::iterate(data, learner_g, learner_h, cc);
  methods.push_back({"iterative", it.combined(), 0.0});
  combiner::save_history_csv(it, (dir / "history.csv").string());

  // Fresh initial conditions; Eq.-(22)-style error aggregated over the
  // whole prediction domain (all test trajectories and steps).
  const auto test = systems::generate_rd_trajectories(
      grid, config.rd_mu, config.rd_eta, config.rd_test_trajectories,
      config.rd_test_steps, law, config.seed + 1);

  for (auto& method : methods) {
    double num = 0.0, den = 0.0;
    bool failed = false;
    for (const MatrixXd& ref : test.trajectories) {
      try {
        const MatrixXd pred = systems::rollout(
            [&](const VectorXd& x) { return method.model->predict(x); },
            ref.row(0).transpose(), config.rd_test_steps);
        num += (pred - ref).cwiseAbs().sum();
        den += ref.cwiseAbs().sum();
      } catch (const Error&) {
        failed = true;  // rollout blow-up: error reported as infinite
        break;
      }
    }
    method.relative_error =
        failed ? std::numeric_limits<double>::infinity() : num / den;
  }

  // Subspace angle between the stencil space and the pointwise polynomial
  // dictionary span on the training data.
  InnerProductContext ctx(data);
  const auto d2 = second_difference_map(k, grid.dz());
  MatrixXd g_eval(data.size(), k);
  for (Eigen::Index i = 0; i < data.size(); ++i)
    g_eval.row(i) = (d2(data.inputs.row(i).transpose()).col(0)).transpose();
  std::vector<MatrixXd> h_feats;
  for (int d = 0; d <= config.rd_dictionary_degree; ++d) {
    MatrixXd f = MatrixXd::Ones(data.size(), k);
    for (int r = 0; r < d; ++r) f = f.cwiseProduct(data.inputs);
    h_feats.push_back(std::move(f));
  }
  const auto g_basis = diag::orthonormalize({g_eval}, ctx);
  const auto h_basis = diag::orthonormalize(h_feats, ctx);
  const auto angles = diag::min_angle(g_basis, h_basis);
  diag::save_angle_report_json(angles, (dir / "angle.json").string());

  // Table-1 analogue, same method order.
  std::string table = "method,relative_error\n";
  for (const char* name :
       {"linear_regression", "koopman", "residual_learning", "iterative"}) {
    for (const auto& m : methods)
      if (m.name == name)
        table += m.name + "," + fmt12(m.relative_error) + "\n";
  }
  write_text((dir / "table1.csv").string(), table);

  ordered_json j;
  j["experiment"] = config.experiment;
  j["seed"] = config.seed;
  for (const auto& m : methods)
    j["relative_error_" + m.name] = round_sig12(m.relative_error);
  j["iterations"] = it.iterations;
  j["final_training_residual"] = round_sig12(it.last().residual_norm);
  j["angle_c0"] = round_sig12(angles.c0);
  j["angle_c"] = round_sig12(angles.c);
  write_json((dir / "summary.json").string(), j);
}

// ---- mpc_compare ---------------------------------------------------------

struct MpcSeedRun {
  std::uint64_t seed = 0;
  std::vector<mpc::TrackingResult> results;  // one per structure
};

const std::vector<mpc::Structure>& mpc_structures() {
  static const std::vector<mpc::Structure> s{
      mpc::Structure::kLinear, mpc::Structure::kHybrid1,
      mpc::Structure::kHybrid2, mpc::Structure::kNonlinear};
  return s;
}

MpcSeedRun run_mpc_seed(const ExperimentConfig& config, std::uint64_t seed) {
  systems::ControlledOscillator osc;
  const Eigen::Index state_dim = 2;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(-1.5, 1.5);
  std::uniform_real_distribution<double> uc(-config.mpc_control_bound,
                                            config.mpc_control_bound);
  std::uniform_real_distribution<double> ue(-2.0, 2.0);

  const int n = config.mpc_training_samples;
  MatrixXd xs(n, state_dim), ys(n, state_dim), cs(n, 1), es(n, 1);
  for (int i = 0; i < n; ++i) {
    VectorXd x(2), c(1), e(1);
    x << ux(rng), ux(rng);
    c << uc(rng);
    e << ue(rng);
    xs.row(i) = x.transpose();
    cs.row(i) = c.transpose();
    es.row(i) = e.transpose();
    ys.row(i) = osc.step(x, c, e).transpose();
  }
  const DataSet data = make_dataset(xs, ys, cs, es);

  const auto dict = koopman::build_polynomial_dictionary(
      state_dim, config.mpc_dictionary_degree);
  const Eigen::Index p = dict.lifted_dim();

  const int steps = config.mpc_steps;
  const int h = config.mpc_horizon;
  MatrixXd z_ref(steps + h + 1, p), forecast(steps + h + 1, 1);
  for (int s = 0; s <= steps + h; ++s) {
    VectorXd xr(2);
    xr(0) = 0.5 * std::sin(0.06 * s);
    xr(1) = 0.5 * (std::sin(0.06 * (s + 1)) - std::sin(0.06 * s)) / osc.dt;
    z_ref.row(s) = dict.lift(xr).transpose();
    forecast(s, 0) = ue(rng);  // rapidly varying external input
  }

  mpc::MPCProblem problem;
  problem.horizon = h;
  problem.q = MatrixXd::Zero(p, p);
  problem.q(1, 1) = 1.0;  // unit weights on the two state coordinates
  problem.q(2, 2) = 1.0;
  problem.r = MatrixXd::Constant(1, 1, 0.1);
  problem.lower = VectorXd::Constant(1, -config.mpc_control_bound);
  problem.upper = VectorXd::Constant(1, config.mpc_control_bound);
  problem.z_ref = z_ref;
  problem.external_forecast = forecast;

  const VectorXd x0 = z_ref.row(0).segment(1, state_dim).transpose();
  const mpc::TrueSystem truth = [&osc](const VectorXd& x, const VectorXd& c,
                                       const VectorXd& e) {
    return osc.step(x, c, e);
  };

  MpcSeedRun run;
  run.seed = seed;
  for (mpc::Structure structure : mpc_structures()) {
    mpc::PredictorSpec spec;
    spec.structure = structure;
    spec.dictionary = dict;
    spec.external_basis = mpc::default_external_basis();
    spec.joint_basis = mpc::default_joint_basis(1);
    spec.combiner_config.max_iterations = 60;
    const auto pred = mpc::fit_predictor(spec, data);
    run.results.push_back(mpc::run_mpc(pred, problem, x0, steps, truth));
  }
  return run;
}

void run_mpc_compare(const ExperimentConfig& config) {
  const fs::path dir(config.output_dir);
  std::vector<MpcSeedRun> runs;
  for (int i = 0; i < config.mpc_seeds; ++i)
    runs.push_back(
        run_mpc_seed(config, config.seed * 0x100000001b3ULL +
                                 static_cast<std::uint64_t>(i)));

  // Per-seed tracking errors (wall-clock timings deliberately left out of
  // the artifacts so outputs are byte-identical across repeat runs).
  std::string per_seed = "seed_index,structure,mean_tracking_error\n";
  for (size_t i = 0; i < runs.size(); ++i)
    for (const auto& res : runs[i].results)
      per_seed += std::to_string(i) + "," + mpc::to_string(res.structure) +
                  "," + fmt12(res.mean_error) + "\n";
  write_text((dir / "tracking_errors.csv").string(), per_seed);

  std::string table = "structure,median_tracking_error,min_hessian_eig\n";
  ordered_json summary_structs = ordered_json::array();
  for (size_t s = 0; s < mpc_structures().size(); ++s) {
    std::vector<double> errs;
    double min_eig = std::numeric_limits<double>::quiet_NaN();
    for (const auto& run : runs) {
      errs.push_back(run.results[s].mean_error);
      const double e = run.results[s].min_hessian_eig;
      if (!std::isnan(e) && !(e >= min_eig)) min_eig = e;
    }
    const double med = median(errs);
    const std::string name = mpc::to_string(mpc_structures()[s]);
    table += name + "," + fmt12(med) + "," + fmt12(min_eig) + "\n";
    ordered_json js;
    js["structure"] = name;
    js["median_tracking_error"] = round_sig12(med);
    if (!std::isnan(min_eig)) js["min_hessian_eig"] = round_sig12(min_eig);
    summary_structs.push_back(js);
  }
  write_text((dir / "comparison.csv").string(), table);

  // Closed-loop trajectories of the first seed, for plotting.
  for (const auto& res : runs.front().results) {
    std::string csv = "step,x_0,x_1,c_0\n";
    for (Eigen::Index k = 0; k < res.controls.rows(); ++k)
      csv += std::to_string(k) + "," + fmt12(res.states(k, 0)) + "," +
             fmt12(res.states(k, 1)) + "," + fmt12(res.controls(k, 0)) + "\n";
    write_text(
        (dir / ("trajectory_" + mpc::to_string(res.structure) + ".csv"))
            .string(),
        csv);
  }

  ordered_json j;
  j["experiment"] = config.experiment;
  j["seed"] = config.seed;
  j["seeds"] = config.mpc_seeds;
  j["steps"] = config.mpc_steps;
  j["structures"] = summary_structs;
  write_json((dir / "summary.json").string(), j);
}

}  // namespace

const std::vector<std::string>& experiment_ids() {
  static const std::vector<std::string> ids{
      "nu_rate", "reaction_diffusion", "toy_suboptimality", "mpc_compare"};
  return ids;
}

double round_sig12(double v) {
  if (!std::isfinite(v)) return v;
  return std::strtod(fmt12(v).c_str(), nullptr);
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open config file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& err) {
    throw Error("config parse error in " + path + ": " + err.what());
  }
  require(j.is_object(), "config root must be a JSON object");

  ExperimentConfig c;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "experiment") c.experiment = value.get<std::string>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "output_dir") c.output_dir = value.get<std::string>();
      else if (key == "nu_values")
        c.nu_values = value.get<std::vector<double>>();
      else if (key == "nu_extra_values")
        c.nu_extra_values = value.get<std::vector<double>>();
      else if (key == "nu_mu1") c.nu_mu1 = value.get<double>();
      else if (key == "nu_mu2") c.nu_mu2 = value.get<double>();
      else if (key == "nu_grid_cells") c.nu_grid_cells = value.get<int>();
      else if (key == "nu_dt") c.nu_dt = value.get<double>();
      else if (key == "nu_max_iterations")
        c.nu_max_iterations = value.get<int>();
      else if (key == "rd_mu") c.rd_mu = value.get<double>();
      else if (key == "rd_eta") c.rd_eta = value.get<double>();
      else if (key == "rd_grid_cells") c.rd_grid_cells = value.get<int>();
      else if (key == "rd_dt") c.rd_dt = value.get<double>();
      else if (key == "rd_trajectories") c.rd_trajectories = value.get<int>();
      else if (key == "rd_steps") c.rd_steps = value.get<int>();
      else if (key == "rd_initial_law")
        c.rd_initial_law = value.get<std::string>();
      else if (key == "rd_dictionary_degree")
        c.rd_dictionary_degree = value.get<int>();
      else if (key == "rd_test_trajectories")
        c.rd_test_trajectories = value.get<int>();
      else if (key == "rd_test_steps") c.rd_test_steps = value.get<int>();
      else if (key == "rd_max_iterations")
        c.rd_max_iterations = value.get<int>();
      else if (key == "toy_max_iterations")
        c.toy_max_iterations = value.get<int>();
      else if (key == "mpc_seeds") c.mpc_seeds = value.get<int>();
      else if (key == "mpc_steps") c.mpc_steps = value.get<int>();
      else if (key == "mpc_horizon") c.mpc_horizon = value.get<int>();
      else if (key == "mpc_training_samples")
        c.mpc_training_samples = value.get<int>();
      else if (key == "mpc_control_bound")
        c.mpc_control_bound = value.get<double>();
      else if (key == "mpc_dictionary_degree")
        c.mpc_dictionary_degree = value.get<int>();
      else
        throw Error("unknown config key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& err) {
    throw Error("config value error in " + path + ": " + err.what());
  }
  return c;
}

void save_config(const ExperimentConfig& c, const std::string& path) {
  ordered_json j;
  j["experiment"] = c.experiment;
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  j["nu_values"] = c.nu_values;
  j["nu_extra_values"] = c.nu_extra_values;
  j["nu_mu1"] = c.nu_mu1;
  j["nu_mu2"] = c.nu_mu2;
  j["nu_grid_cells"] = c.nu_grid_cells;
  j["nu_dt"] = c.nu_dt;
  j["nu_max_iterations"] = c.nu_max_iterations;
  j["rd_mu"] = c.rd_mu;
  j["rd_eta"] = c.rd_eta;
  j["rd_grid_cells"] = c.rd_grid_cells;
  j["rd_dt"] = c.rd_dt;
  j["rd_trajectories"] = c.rd_trajectories;
  j["rd_steps"] = c.rd_steps;
  j["rd_initial_law"] = c.rd_initial_law;
  j["rd_dictionary_degree"] = c.rd_dictionary_degree;
  j["rd_test_trajectories"] = c.rd_test_trajectories;
  j["rd_test_steps"] = c.rd_test_steps;
  j["rd_max_iterations"] = c.rd_max_iterations;
  j["toy_max_iterations"] = c.toy_max_iterations;
  j["mpc_seeds"] = c.mpc_seeds;
  j["mpc_steps"] = c.mpc_steps;
  j["mpc_horizon"] = c.mpc_horizon;
  j["mpc_training_samples"] = c.mpc_training_samples;
  j["mpc_control_bound"] = c.mpc_control_bound;
  j["mpc_dictionary_degree"] = c.mpc_dictionary_degree;
  write_json(path, j);
}

void validate_config(const ExperimentConfig& c) {
  const auto& ids = experiment_ids();
  require(std::find(ids.begin(), ids.end(), c.experiment) != ids.end(),
          "unknown experiment '" + c.experiment + "'");
  require(!c.output_dir.empty(), "output_dir must not be empty");
  require(c.nu_grid_cells >= 4 && c.nu_dt > 0 && c.nu_max_iterations >= 1,
          "invalid nu_rate parameters");
  require(c.rd_grid_cells >= 3 && c.rd_dt > 0 && c.rd_trajectories >= 1 &&
              c.rd_steps >= 1 && c.rd_dictionary_degree >= 1 &&
              c.rd_test_trajectories >= 1 && c.rd_test_steps >= 1 &&
              c.rd_max_iterations >= 1,
          "invalid reaction_diffusion parameters");
  systems::initial_law_from_string(c.rd_initial_law);
  require(c.toy_max_iterations >= 1, "invalid toy parameters");
  require(c.mpc_seeds >= 1 && c.mpc_steps >= 1 && c.mpc_horizon >= 1 &&
              c.mpc_training_samples >= 10 && c.mpc_control_bound > 0 &&
              c.mpc_dictionary_degree >= 1,
          "invalid mpc_compare parameters");
}

void apply_env_overrides(ExperimentConfig& config) {
  if (const char* out = std::getenv("MODCOMB_OUT"); out != nullptr && *out)
    config.output_dir = out;
  if (const char* seed = std::getenv("MODCOMB_SEED");
      seed != nullptr && *seed) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(seed, &end, 10);
    require(end != nullptr && *end == '\0', "MODCOMB_SEED must be an integer");
    config.seed = static_cast<std::uint64_t>(v);
  }
}

void run_experiment(const ExperimentConfig& config) {
  validate_config(config);
  std::error_code ec;
  fs::create_directories(config.output_dir, ec);
  require(!ec && fs::is_directory(config.output_dir),
          "cannot create output directory " + config.output_dir);
  save_config(config, (fs::path(config.output_dir) / "config.json").string());

  if (config.experiment == "toy_suboptimality") run_toy(config);
  else if (config.experiment == "nu_rate") run_nu_rate(config);
  else if (config.experiment == "reaction_diffusion")
    run_reaction_diffusion(config);
  else if (config.experiment == "mpc_compare") run_mpc_compare(config);
  else
    throw Error("unknown experiment '" + config.experiment + "'");
}

}  // namespace modcomb::experiments
