#include "modcomb/systems.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

namespace modcomb::systems {

namespace {

// Euclidean norm over all entries of a trajectory matrix.
double frob(const MatrixXd& m) { return m.norm(); }

VectorXd draw_field(Eigen::Index k, InitialLaw law, std::mt19937_64& rng) {
  VectorXd u(k);
  if (law == InitialLaw::kUniform01) {
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    for (Eigen::Index j = 0; j < k; ++j) u(j) = dist(rng);
  } else {
    std::normal_distribution<double> dist(0.0, 1.0);
    for (Eigen::Index j = 0; j < k; ++j) u(j) = dist(rng);
  }
  return u;
}

}  // namespace

std::string to_string(InitialLaw law) {
  return law == InitialLaw::kUniform01 ? "uniform01" : "normal";
}

InitialLaw initial_law_from_string(const std::string& name) {
  if (name == "uniform01") return InitialLaw::kUniform01;
  if (name == "normal") return InitialLaw::kStandardNormal;
  throw Error("unknown initial law '" + name + "'");
}

double reaction_term(double u, double eta) {
  return 4.0 * eta * u * (u * u - 1.0);
}

MatrixXd simulate_reaction_diffusion_1d(const Grid1D& grid, double mu,
                                        double eta, const VectorXd& u0,
                                        int steps) {
  grid.validate();
  require(steps >= 1, "steps must be >= 1");
  require_dim(grid.interior(), u0.size(), "initial condition");
  const Eigen::Index k = grid.interior();
  const double inv_dz2 = 1.0 / (grid.dz() * grid.dz());

  MatrixXd traj(steps + 1, k);
  traj.row(0) = u0.transpose();
  VectorXd u = u0;
  VectorXd next(k);
  for (int s = 0; s < steps; ++s) {
    for (Eigen::Index j = 0; j < k; ++j) {
      const double left = j > 0 ? u(j - 1) : 0.0;
      const double right = j + 1 < k ? u(j + 1) : 0.0;
      const double lap = (left - 2.0 * u(j) + right) * inv_dz2;
      next(j) = u(j) + grid.dt * (mu * lap + reaction_term(u(j), eta));
    }
    if (!next.allFinite())
      throw Error("reaction-diffusion simulation blew up at step " +
                  std::to_string(s + 1));
    u = next;
    traj.row(s + 1) = u.transpose();
  }
  return traj;
}

TrajectorySet generate_rd_trajectories(const Grid1D& grid, double mu,
                                       double eta, int n_trajectories,
                                       int steps, InitialLaw law,
                                       std::uint64_t seed) {
  require(n_trajectories >= 1, "need at least one trajectory");
  std::mt19937_64 rng(seed);
  TrajectorySet set;
  set.seed = seed;
  set.law = law;
  set.trajectories.reserve(n_trajectories);
  for (int t = 0; t < n_trajectories; ++t) {
    const VectorXd u0 = draw_field(grid.interior(), law, rng);
    set.trajectories.push_back(
        simulate_reaction_diffusion_1d(grid, mu, eta, u0, steps));
  }
  return set;
}

MatrixXd simulate_diffusion_2d(const Grid2D& grid, double mu1, double mu2,
                               const MatrixXd& u0, int steps) {
  grid.validate();
  require(steps >= 1, "steps must be >= 1");
  const Eigen::Index m = grid.interior_per_axis();
  require(u0.rows() == m && u0.cols() == m,
          "initial field must be the square interior");
  const double inv_dz2 = 1.0 / (grid.dz() * grid.dz());

  MatrixXd traj(steps + 1, m * m);
  MatrixXd u = u0, next(m, m);
  traj.row(0) = u.reshaped<Eigen::RowMajor>().transpose();
  for (int s = 0; s < steps; ++s) {
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = 0; j < m; ++j) {
        const double up = i > 0 ? u(i - 1, j) : 0.0;
        const double down = i + 1 < m ? u(i + 1, j) : 0.0;
        const double left = j > 0 ? u(i, j - 1) : 0.0;
        const double right = j + 1 < m ? u(i, j + 1) : 0.0;
        const double lap1 = (up - 2.0 * u(i, j) + down) * inv_dz2;
        const double lap2 = (left - 2.0 * u(i, j) + right) * inv_dz2;
        next(i, j) = u(i, j) + grid.dt * (mu1 * lap1 + mu2 * lap2);
      }
    }
    if (!next.allFinite())
      throw Error("2D diffusion simulation blew up at step " +
                  std::to_string(s + 1));
    u = next;
    traj.row(s + 1) = u.reshaped<Eigen::RowMajor>().transpose();
  }
  return traj;
}

MatrixXd rollout(const std::function<VectorXd(const VectorXd&)>& model,
                 const VectorXd& x0, int k_steps) {
  require(k_steps >= 1, "k_steps must be >= 1");
  MatrixXd traj(k_steps + 1, x0.size());
  traj.row(0) = x0.transpose();
  VectorXd x = x0;
  for (int s = 0; s < k_steps; ++s) {
    x = model(x);
    require_dim(x0.size(), x.size(), "rollout state");
    if (!x.allFinite())
      throw Error("rollout produced non-finite state at step " +
                  std::to_string(s + 1));
    traj.row(s + 1) = x.transpose();
  }
  return traj;
}

VectorXd stepwise_error(const MatrixXd& pred, const MatrixXd& ref) {
  require(pred.rows() == ref.rows() && pred.cols() == ref.cols(),
          "trajectory shape mismatch");
  const double ref_norm = frob(ref);
  require(ref_norm > 0.0, "reference trajectory is identically zero");
  VectorXd err(pred.rows());
  for (Eigen::Index s = 0; s < pred.rows(); ++s)
    err(s) = (pred.row(s) - ref.row(s)).norm() / ref_norm;
  return err;
}

double domain_relative_error(const MatrixXd& pred, const MatrixXd& ref) {
  require(pred.rows() == ref.rows() && pred.cols() == ref.cols(),
          "trajectory shape mismatch");
  const double denom = ref.cwiseAbs().sum();
  require(denom > 0.0, "reference trajectory is identically zero");
  return (pred - ref).cwiseAbs().sum() / denom;
}

DataSet generate_dataset(const TrajectorySet& traj) {
  require(!traj.trajectories.empty(), "no trajectories");
  Eigen::Index n_pairs = 0;
  const Eigen::Index k = traj.trajectories.front().cols();
  for (const MatrixXd& t : traj.trajectories) {
    require(t.cols() == k && t.rows() >= 2, "inconsistent trajectory");
    n_pairs += t.rows() - 1;
  }
  MatrixXd inputs(n_pairs, k), targets(n_pairs, k);
  Eigen::Index row = 0;
  for (const MatrixXd& t : traj.trajectories) {
    const Eigen::Index m = t.rows() - 1;
    inputs.middleRows(row, m) = t.topRows(m);
    targets.middleRows(row, m) = t.bottomRows(m);
    row += m;
  }
  return make_dataset(std::move(inputs), std::move(targets));
}

void save_trajectories(const TrajectorySet& traj, const std::string& dir,
                       const std::string& prefix,
                       const TrajectoryExportMeta& meta) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  char buf[64];
  for (size_t t = 0; t < traj.trajectories.size(); ++t) {
    const MatrixXd& m = traj.trajectories[t];
    const fs::path path =
        fs::path(dir) / (prefix + "_" + std::to_string(t) + ".csv");
    std::ofstream out(path);
    require(out.good(), "cannot open " + path.string() + " for writing");
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      out << (j > 0 ? ",u_" : "u_") << j;
    out << "\n";
    for (Eigen::Index s = 0; s < m.rows(); ++s) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        std::snprintf(buf, sizeof(buf), "%.17g", m(s, j));
        out << (j > 0 ? "," : "") << buf;
      }
      out << "\n";
    }
  }
  nlohmann::ordered_json j;
  j["seed"] = traj.seed;
  j["law"] = to_string(traj.law);
  j["mu"] = meta.mu;
  j["eta"] = meta.eta;
  j["dt"] = meta.dt;
  j["dz"] = meta.dz;
  j["steps"] = meta.steps;
  j["n_trajectories"] = traj.trajectories.size();
  const fs::path mpath = fs::path(dir) / (prefix + "_manifest.json");
  std::ofstream out(mpath);
  require(out.good(), "cannot open " + mpath.string() + " for writing");
  out << j.dump(2) << "\n";
}

}  // namespace modcomb::systems
