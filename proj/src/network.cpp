#include "oscillopf/network.hpp"

#include <Eigen/LU>

namespace oscillopf {

int AdmittanceModel::index_of(int bus_id) const {
  for (size_t i = 0; i < bus_order.size(); ++i)
    if (bus_order[i] == bus_id) return static_cast<int>(i);
  throw Error("bus id " + std::to_string(bus_id) + " not in admittance model");
}

MatrixXcd KronModel::coupling() const {
  return Gamma * y_internal.asDiagonal();
}

AdmittanceModel build_ybus(const RawCase& c) {
  const int n = static_cast<int>(c.buses.size());
  AdmittanceModel adm;
  adm.Y = MatrixXcd::Zero(n, n);
  for (const Bus& b : c.buses) adm.bus_order.push_back(b.id);

  for (const Branch& br : c.branches) {
    if (!br.status) continue;
    if (br.r == 0.0 && br.x == 0.0)
      throw Error("branch " + std::to_string(br.from) + "-" + std::to_string(br.to) +
                  " has zero impedance");
    const int i = adm.index_of(br.from);
    const int j = adm.index_of(br.to);
    const Complex y = 1.0 / Complex(br.r, br.x);
    const Complex half_charge(0.0, 0.5 * br.b_charging);
    adm.Y(i, j) -= y;
    adm.Y(j, i) -= y;
    adm.Y(i, i) += y + half_charge;
    adm.Y(j, j) += y + half_charge;
  }
  for (int k = 0; k < n; ++k) {
    const Bus& b = c.buses[k];
    adm.Y(k, k) += Complex(b.shunt_g, b.shunt_b) / c.base_mva;
  }
  return adm;
}

KronModel kron_reduce(const AdmittanceModel& adm, const DynamicParams& dyn,
                      const std::vector<int>& sync_buses, double zero_threshold) {
  const int n = static_cast<int>(adm.bus_order.size());
  const int s = static_cast<int>(sync_buses.size());

  std::vector<int> sync_idx, nonsync_idx;
  for (int b : sync_buses) sync_idx.push_back(adm.index_of(b));
  {
    std::vector<bool> is_sync(n, false);
    for (int i : sync_idx) is_sync[i] = true;
    for (int i = 0; i < n; ++i)
      if (!is_sync[i]) nonsync_idx.push_back(i);
  }
  const int m = static_cast<int>(nonsync_idx.size());

  KronModel kron;
  kron.sync_buses = sync_buses;
  kron.y_internal.resize(s);
  for (int a = 0; a < s; ++a)
    kron.y_internal[a] = 1.0 / Complex(0.0, dyn.reactance_at(sync_buses[a]));

  MatrixXcd Yss(s, s), Ysn(s, m), Ynn(m, m);
  for (int a = 0; a < s; ++a)
    for (int b = 0; b < s; ++b) Yss(a, b) = adm.Y(sync_idx[a], sync_idx[b]);
  for (int a = 0; a < s; ++a)
    for (int b = 0; b < m; ++b) Ysn(a, b) = adm.Y(sync_idx[a], nonsync_idx[b]);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) Ynn(a, b) = adm.Y(nonsync_idx[a], nonsync_idx[b]);

  MatrixXcd reduced = Yss + MatrixXcd(kron.y_internal.asDiagonal());
  if (m > 0) {
    Eigen::PartialPivLU<MatrixXcd> lu(Ynn);
    MatrixXcd sol = lu.solve(Ysn.transpose());
    if (!sol.allFinite() || (Ynn * sol - Ysn.transpose()).norm() > 1e-6 * Ysn.norm())
      throw Error("kron_reduce: singular non-synchronous block");
    reduced -= Ysn * sol;
  }

  Eigen::PartialPivLU<MatrixXcd> lu_red(reduced);
  kron.Gamma = lu_red.solve(MatrixXcd::Identity(s, s));
  if (!kron.Gamma.allFinite() ||
      (reduced * kron.Gamma - MatrixXcd::Identity(s, s)).norm() > 1e-6 * std::max(1.0, reduced.norm()))
    throw Error("kron_reduce: reduced matrix is singular");

  // With i = Y v and Y_S = diag(1/(j x_n)), coupled machine pairs come out
  // with Im(Gamma_nm) > 0 and the effective series reactance between their
  // internal nodes is x_n x_m / Im(Gamma_nm); a nonpositive value flags an
  // inadmissible network.
  kron.eff_reactance = MatrixXd::Zero(s, s);
  for (int a = 0; a < s; ++a) {
    for (int b = a + 1; b < s; ++b) {
      const double im = 0.5 * (kron.Gamma(a, b).imag() + kron.Gamma(b, a).imag());
      if (std::abs(im) <= zero_threshold) continue;
      const double xa = dyn.reactance_at(sync_buses[a]);
      const double xb = dyn.reactance_at(sync_buses[b]);
      const double g = (xa * xb) / im;
      if (!(g > 0))
        throw Error("kron_reduce: nonpositive effective reactance between buses " +
                    std::to_string(sync_buses[a]) + " and " + std::to_string(sync_buses[b]));
      kron.eff_reactance(a, b) = kron.eff_reactance(b, a) = g;
    }
  }
  return kron;
}

QuadraticForms quadratic_forms(const AdmittanceModel& adm, const RawCase& c) {
  const int n = static_cast<int>(adm.bus_order.size());
  QuadraticForms f;
  f.M_p.reserve(n);
  f.M_q.reserve(n);
  f.M_v.reserve(n);

  for (int k = 0; k < n; ++k) {
    MatrixXcd phi = MatrixXcd::Zero(n, n);
    phi.row(k) = adm.Y.row(k);
    f.M_p.push_back(0.5 * (phi.adjoint() + phi));
    f.M_q.push_back((phi.adjoint() - phi) / Complex(0.0, 2.0));
    MatrixXcd mv = MatrixXcd::Zero(n, n);
    mv(k, k) = 1.0;
    f.M_v.push_back(mv);
  }

  for (size_t bi = 0; bi < c.branches.size(); ++bi) {
    const Branch& br = c.branches[bi];
    if (!br.status) continue;
    const int i = adm.index_of(br.from);
    const int j = adm.index_of(br.to);
    const Complex y = 1.0 / Complex(br.r, br.x);
    const Complex half_charge(0.0, 0.5 * br.b_charging);
    // i_from = (y + j b/2) v_from - y v_to = a^H v
    VectorXcd a = VectorXcd::Zero(n);
    a[i] = std::conj(y + half_charge);
    a[j] = std::conj(-y);
    f.M_i[static_cast<int>(bi)] = a * a.adjoint();
  }
  return f;
}

}  // namespace oscillopf
