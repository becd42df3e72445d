#pragma once

#include <vector>

#include "oscillopf/case.hpp"
#include "oscillopf/linalg.hpp"
#include "oscillopf/network.hpp"

namespace oscillopf {

/// Equilibrium internal voltages of the synchronous machines, ordered like
/// KronModel::sync_buses.
struct OperatingPoint {
  VectorXd e_mag;  // pu, > 0
  VectorXd e_ang;  // rad

  VectorXcd phasors() const;
};

struct LaplacianResult {
  MatrixXd L;
  bool admissible = true;  // false if some coupled pair has |angle spread| >= pi/2
};

/// Either the K smallest nonzero modes or all modes with sqrt(lambda) inside
/// [omega_min, omega_max].
struct BandSpec {
  enum class Mode { Count, Range } mode = Mode::Count;
  int k = 3;
  double omega_min = 0.0;
  double omega_max = 0.0;

  static BandSpec count(int k) { return {Mode::Count, k, 0, 0}; }
  static BandSpec range(double lo, double hi) { return {Mode::Range, 0, lo, hi}; }
};

struct SwingSpectrum {
  MatrixXd L;            // pu/rad
  MatrixXd L_M;          // M^{-1/2} L M^{-1/2}
  VectorXd eigvals;      // ascending
  MatrixXd eigvecs;      // orthonormal columns
  std::vector<int> band; // 0-based indices into eigvals
};

/// Laplacian of the linearized swing coupling at an operating point.
/// Inadmissible points are flagged, not rejected.
LaplacianResult laplacian_from_angles(const OperatingPoint& op, const KronModel& kron);

/// Linear map from the lifted Hermitian variable E = e e^H to the Laplacian:
/// L_nm = -Re(E_nm)/gamma_nm off diagonal, diagonal balances rows to zero sum.
MatrixXd laplacian_from_lifted(const MatrixXcd& E_lift, const KronModel& kron);

/// Mass-scaled spectrum. `inertias` ordered like the Laplacian rows.
/// Throws if an eigenvalue falls below -1e-8.
SwingSpectrum spectrum(const MatrixXd& L, const VectorXd& inertias);

std::vector<int> select_band(const SwingSpectrum& spec, const BandSpec& band);

/// |H_i(j w)|^2 = 1 / ((lambda - w^2)^2 + gamma^2 w^2).
double freq_response_sq(double lambda, double gamma, double omega);

/// Stationary variance 1/(2 lambda gamma) of an eigenstate under unit white noise.
double eigenstate_variance(double lambda, double gamma);

/// f_y = 1/(2 gamma) * sum over the band of 1/lambda_i.
double stability_metric(const SwingSpectrum& spec, double gamma);

/// Bounds f_y/sqrt(M_max) <= f_delta <= f_y/sqrt(M_min).
std::pair<double, double> f_delta_bounds(double f_y, const VectorXd& inertias);

/// Inertia vector for the synchronous buses of a Kron model.
VectorXd inertia_vector(const KronModel& kron, const DynamicParams& dyn);

/// Internal voltages recovered from solved external sync voltages via
/// e = (Gamma Y_S)^{-1} v_S.
OperatingPoint operating_point_from_voltages(const VectorXcd& v_sync, const KronModel& kron);

}  // namespace oscillopf
