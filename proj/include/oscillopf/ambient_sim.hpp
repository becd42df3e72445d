#pragma once

#include <vector>

#include "oscillopf/dynamics.hpp"

namespace oscillopf {

struct SimConfig {
  double dt = 1e-3;       // s
  double horizon = 2000;  // s
  double burn_in = 200;   // s
  int n_trials = 8;
  unsigned seed = 42;
  int traj_stride = 0;  // 0 = do not record trajectories

  void validate() const;
};

struct VarianceEstimate {
  double value = 0.0;
  double stderr_ = 0.0;
};

struct SwingSimResult {
  VarianceEstimate band_energy;             // E[||y_band||^2]
  std::vector<VarianceEstimate> per_mode;   // per band mode
  std::vector<int> band;
  // decimated trajectory of trial 0: times and per-band-mode samples
  std::vector<double> traj_t;
  std::vector<VectorXd> traj_y;
};

/// Euler-Maruyama integration of y'' + gamma y' + lambda y = x with unit
/// intensity white noise (variance 1/dt per step). Throws when dt is too
/// coarse for the explicit scheme.
VarianceEstimate simulate_eigensystem(double lambda, double gamma, const SimConfig& cfg);

/// Coupled swing simulation M d'' + D d' + L d = p with noise covariance
/// M/dt per step, drift-implicit in the damping and stiffness-stable for
/// dt < 2/sqrt(lambda_max). States are projected by y = U^T M^{1/2} d; the
/// marginally stable first mode is excluded from every energy estimate.
/// `delta0` seeds the angle state (zeros when empty); `noise_scale` = 0 turns
/// the driving noise off for deterministic diagnostics.
SwingSimResult simulate_swing(const MatrixXd& L, const VectorXd& inertias,
                              const VectorXd& dampings, const BandSpec& band,
                              const SimConfig& cfg, const VectorXd& delta0 = {},
                              double noise_scale = 1.0);

/// Numeric integral of the squared impulse response of one eigensystem,
/// truncated once the envelope falls below 1e-12.
double impulse_energy(double lambda, double gamma);

}  // namespace oscillopf
