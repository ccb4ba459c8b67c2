#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "modcomb/dataset.hpp"

namespace modcomb::systems {

using modcomb::DataSet;
using modcomb::MatrixXd;
using modcomb::VectorXd;

/// 1D grid on [0,1] with homogeneous Dirichlet boundaries.  n_cells
/// subintervals of width 1/n_cells; the state holds the n_cells - 1
/// interior values.
struct Grid1D {
  int n_cells = 20;
  double dt = 1e-3;

  double dz() const { return 1.0 / n_cells; }
  Eigen::Index interior() const { return n_cells - 1; }
  double cfl(double mu) const { return mu * dt / (dz() * dz()); }
  void validate() const {
    require(n_cells >= 3 && dt > 0, "invalid 1D grid");
  }
};

/// [0,1]^2 with equal spacing on both axes; interior is a square of
/// (n_cells - 1)^2 values stored row-major.
struct Grid2D {
  int n_cells = 10;
  double dt = 1e-3;

  double dz() const { return 1.0 / n_cells; }
  Eigen::Index interior_per_axis() const { return n_cells - 1; }
  Eigen::Index interior() const {
    return interior_per_axis() * interior_per_axis();
  }
  double cfl(double mu) const { return mu * dt / (dz() * dz()); }
  void validate() const {
    require(n_cells >= 3 && dt > 0, "invalid 2D grid");
  }
};

enum class InitialLaw { kUniform01, kStandardNormal };

std::string to_string(InitialLaw law);
InitialLaw initial_law_from_string(const std::string& name);

struct TrajectorySet {
  std::vector<MatrixXd> trajectories;  // each (steps+1) x K
  std::uint64_t seed = 0;
  InitialLaw law = InitialLaw::kUniform01;
};

/// dR/du of the double-well potential eta (u-1)^2 (u+1)^2, i.e.
/// 4 eta u (u^2 - 1).
double reaction_term(double u, double eta);

/// Forward-Euler trajectory of du/dt = mu u_zz + R_eta(u); returns a
/// (steps+1) x K matrix whose first row is u0.  Throws on blow-up, naming
/// the step.
MatrixXd simulate_reaction_diffusion_1d(const Grid1D& grid, double mu,
                                        double eta, const VectorXd& u0,
                                        int steps);

TrajectorySet generate_rd_trajectories(const Grid1D& grid, double mu,
                                       double eta, int n_trajectories,
                                       int steps, InitialLaw law,
                                       std::uint64_t seed);

/// Forward-Euler trajectory of du/dt = mu1 u_z1z1 + mu2 u_z2z2 on the 2D
/// grid; u0 is the interior field, rows of the result are flattened
/// row-major fields.
MatrixXd simulate_diffusion_2d(const Grid2D& grid, double mu1, double mu2,
                               const MatrixXd& u0, int steps);

/// Iterates a one-step model k_steps times; row k is the state after k
/// applications.
MatrixXd rollout(const std::function<VectorXd(const VectorXd&)>& model,
                 const VectorXd& x0, int k_steps);

/// error_k = ||pred_k - ref_k|| / ||ref||, with ||ref|| the norm of the
/// whole reference trajectory.
VectorXd stepwise_error(const MatrixXd& pred, const MatrixXd& ref);

/// sum |pred - ref| over all grid-time points divided by sum |ref|.
double domain_relative_error(const MatrixXd& pred, const MatrixXd& ref);

/// Consecutive-pair extraction from all trajectories.
DataSet generate_dataset(const TrajectorySet& traj);

/// Synthetic two-state controlled oscillator with a state-multiplicative
/// external input: x1' = x2, x2' = -x1 + (a0 + a1 sin e) x2 + c,
/// Euler-discretized with step dt.
struct ControlledOscillator {
  double dt = 0.05;
  double a0 = -0.3;
  double a1 = 1.5;

  VectorXd step(const VectorXd& x, const VectorXd& c, const VectorXd& e) const {
    require(x.size() == 2 && c.size() == 1 && e.size() == 1,
            "oscillator expects 2 states, 1 control, 1 external");
    VectorXd next(2);
    next(0) = x(0) + dt * x(1);
    next(1) = x(1) + dt * (-x(0) + (a0 + a1 * std::sin(e(0))) * x(1) + c(0));
    return next;
  }
};

struct TrajectoryExportMeta {
  double mu = 0.0;
  double eta = 0.0;
  double dt = 0.0;
  double dz = 0.0;
  int steps = 0;
};

/// CSV per trajectory (<prefix>_<idx>.csv) plus <prefix>_manifest.json with
/// {seed, law, mu, eta, dt, dz, steps}.
void save_trajectories(const TrajectorySet& traj, const std::string& dir,
                       const std::string& prefix,
                       const TrajectoryExportMeta& meta);

}  // namespace modcomb::systems
