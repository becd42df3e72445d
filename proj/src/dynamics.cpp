#include "oscillopf/dynamics.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <algorithm>
#include <cmath>

namespace oscillopf {

VectorXcd OperatingPoint::phasors() const {
  VectorXcd e(e_mag.size());
  for (int i = 0; i < e_mag.size(); ++i)
    e[i] = std::polar(e_mag[i], e_ang[i]);
  return e;
}

LaplacianResult laplacian_from_angles(const OperatingPoint& op, const KronModel& kron) {
  const int s = static_cast<int>(kron.sync_buses.size());
  if (op.e_mag.size() != s || op.e_ang.size() != s)
    throw Error("operating point size mismatch");
  for (int i = 0; i < s; ++i)
    if (!(op.e_mag[i] > 0)) throw Error("internal voltage magnitude must be positive");

  LaplacianResult res;
  res.L = MatrixXd::Zero(s, s);
  for (int n = 0; n < s; ++n) {
    for (int m = n + 1; m < s; ++m) {
      if (!kron.has_edge(n, m)) continue;
      const double spread = op.e_ang[n] - op.e_ang[m];
      if (std::abs(spread) >= M_PI / 2) res.admissible = false;
      const double w =
          op.e_mag[n] * op.e_mag[m] / kron.eff_reactance(n, m) * std::cos(spread);
      res.L(n, m) = res.L(m, n) = -w;
    }
  }
  for (int n = 0; n < s; ++n) res.L(n, n) = -res.L.row(n).sum();
  return res;
}

MatrixXd laplacian_from_lifted(const MatrixXcd& E_lift, const KronModel& kron) {
  const int s = static_cast<int>(kron.sync_buses.size());
  if (E_lift.rows() != s || E_lift.cols() != s)
    throw Error("lifted matrix size mismatch");
  MatrixXd L = MatrixXd::Zero(s, s);
  for (int n = 0; n < s; ++n) {
    for (int m = n + 1; m < s; ++m) {
      if (!kron.has_edge(n, m)) continue;
      const double re = 0.5 * (E_lift(n, m).real() + E_lift(m, n).real());
      L(n, m) = L(m, n) = -re / kron.eff_reactance(n, m);
    }
  }
  for (int n = 0; n < s; ++n) L(n, n) = -L.row(n).sum();
  return L;
}

SwingSpectrum spectrum(const MatrixXd& L, const VectorXd& inertias) {
  const int s = static_cast<int>(L.rows());
  if (inertias.size() != s) throw Error("inertia vector size mismatch");
  for (int i = 0; i < s; ++i)
    if (!(inertias[i] > 0)) throw Error("inertias must be positive");

  SwingSpectrum sp;
  sp.L = 0.5 * (L + L.transpose());
  VectorXd m_isqrt = inertias.cwiseSqrt().cwiseInverse();
  sp.L_M = m_isqrt.asDiagonal() * sp.L * m_isqrt.asDiagonal();
  sp.L_M = 0.5 * (sp.L_M + sp.L_M.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(sp.L_M);
  if (eig.info() != Eigen::Success) throw Error("spectrum: eigensolver failed");
  sp.eigvals = eig.eigenvalues();
  sp.eigvecs = eig.eigenvectors();

  const double scale = std::max(1.0, sp.L_M.norm());
  if (sp.eigvals[0] < -1e-8 * scale)
    throw Error("spectrum: matrix is not positive semidefinite");
  return sp;
}

std::vector<int> select_band(const SwingSpectrum& spec, const BandSpec& band) {
  const int s = static_cast<int>(spec.eigvals.size());
  std::vector<int> out;
  if (band.mode == BandSpec::Mode::Count) {
    if (band.k < 1 || band.k > s - 1)
      throw Error("band size K must lie in [1, S-1]");
    for (int i = 1; i <= band.k; ++i) out.push_back(i);
  } else {
    for (int i = 1; i < s; ++i) {
      const double w = std::sqrt(std::max(0.0, spec.eigvals[i]));
      if (w >= band.omega_min && w <= band.omega_max) out.push_back(i);
    }
  }
  return out;
}

double freq_response_sq(double lambda, double gamma, double omega) {
  const double d = lambda - omega * omega;
  return 1.0 / (d * d + gamma * gamma * omega * omega);
}

double eigenstate_variance(double lambda, double gamma) {
  if (!(lambda > 0)) throw Error("eigenstate_variance: marginally stable mode");
  if (!(gamma > 0)) throw Error("eigenstate_variance: gamma must be positive");
  return 1.0 / (2.0 * lambda * gamma);
}

double stability_metric(const SwingSpectrum& spec, double gamma) {
  if (spec.band.empty()) throw Error("stability_metric: empty band");
  double sum = 0.0;
  for (int i : spec.band) {
    const double lam = spec.eigvals[i];
    if (!(lam > 0)) throw Error("stability_metric: zero eigenvalue inside band");
    sum += 1.0 / lam;
  }
  return sum / (2.0 * gamma);
}

std::pair<double, double> f_delta_bounds(double f_y, const VectorXd& inertias) {
  const double m_max = inertias.maxCoeff();
  const double m_min = inertias.minCoeff();
  return {f_y / std::sqrt(m_max), f_y / std::sqrt(m_min)};
}

VectorXd inertia_vector(const KronModel& kron, const DynamicParams& dyn) {
  VectorXd m(kron.sync_buses.size());
  for (size_t i = 0; i < kron.sync_buses.size(); ++i)
    m[static_cast<int>(i)] = dyn.inertia_at(kron.sync_buses[i]);
  return m;
}

OperatingPoint operating_point_from_voltages(const VectorXcd& v_sync, const KronModel& kron) {
  MatrixXcd coupling = kron.coupling();
  Eigen::PartialPivLU<MatrixXcd> lu(coupling);
  VectorXcd e = lu.solve(v_sync);
  if (!e.allFinite()) throw Error("coupling matrix is singular");
  OperatingPoint op;
  op.e_mag.resize(e.size());
  op.e_ang.resize(e.size());
  for (int i = 0; i < e.size(); ++i) {
    op.e_mag[i] = std::abs(e[i]);
    op.e_ang[i] = std::arg(e[i]);
  }
  return op;
}

}  // namespace oscillopf
