#include "oscillopf/recovery.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include <json.hpp>

namespace oscillopf {

double rank1_ratio(const MatrixXcd& X) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> eig(0.5 * (X + X.adjoint().eval()),
                                               Eigen::EigenvaluesOnly);
  VectorXd ev = eig.eigenvalues();  // ascending
  const int n = static_cast<int>(ev.size());
  if (n < 1 || !(ev[n - 1] > 1e-12 * std::max(1.0, X.norm())))
    throw Error("rank1_ratio: matrix is numerically zero");
  if (n == 1) return 0.0;
  return std::max(0.0, ev[n - 2]) / ev[n - 1];
}

VectorXcd rank1_factor(const MatrixXcd& X, int ref_pos) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> eig(0.5 * (X + X.adjoint().eval()));
  const int n = static_cast<int>(eig.eigenvalues().size());
  const double lead = eig.eigenvalues()[n - 1];
  if (!(lead > 0)) throw Error("rank1_factor: matrix has no positive eigenvalue");
  VectorXcd v = std::sqrt(lead) * eig.eigenvectors().col(n - 1);
  const Complex ref = v[ref_pos];
  if (std::abs(ref) > 0) v *= std::conj(ref) / std::abs(ref);
  return v;
}

VectorXcd extract_voltages(const MatrixXcd& X, int ref_pos, double threshold) {
  const double ratio = rank1_ratio(X);
  if (ratio > threshold)
    throw Error("extract_voltages: relaxation is inexact (rank-1 ratio " +
                std::to_string(ratio) + " above " + std::to_string(threshold) + ")");
  return rank1_factor(X, ref_pos);
}

ExactnessReport verify_dispatch(const VectorXcd& v, const VectorXcd& e,
                                const RawCase& c, const AdmittanceModel& adm,
                                const KronModel& kron, const DynamicParams& dyn,
                                double gamma, const BandSpec& band,
                                const VectorXd& p_g_sdp, const VectorXd& q_g_sdp) {
  ExactnessReport rep;
  rep.recovered_v = v;
  rep.recovered_e = e;

  const int n = static_cast<int>(c.buses.size());
  const int s = static_cast<int>(kron.sync_buses.size());
  const double base = c.base_mva;
  VectorXcd inj = v.cwiseProduct((adm.Y * v).conjugate());

  double resid = 0.0;
  for (int a = 0; a < s; ++a) {
    const int pos = c.bus_index(kron.sync_buses[a]);
    const Bus& bus = c.buses[pos];
    resid = std::max(resid, std::abs(inj[pos].real() - (p_g_sdp[a] - bus.p_load / base)));
    resid = std::max(resid, std::abs(inj[pos].imag() - (q_g_sdp[a] - bus.q_load / base)));
  }
  for (int bus_id : c.zero_injection_buses()) {
    const int pos = c.bus_index(bus_id);
    resid = std::max(resid, std::abs(inj[pos]));
  }
  {
    VectorXcd v_sync(s);
    for (int a = 0; a < s; ++a) v_sync[a] = v[c.bus_index(kron.sync_buses[a])];
    VectorXcd mismatch = v_sync - kron.coupling() * e;
    resid = std::max(resid, mismatch.cwiseAbs().maxCoeff());
  }
  rep.max_pf_residual = resid;

  const double tol = 1e-5;
  for (int pos = 0; pos < n; ++pos) {
    const Bus& bus = c.buses[pos];
    const double vm = std::abs(v[pos]);
    if (vm > bus.v_max + tol) rep.limit_violations.push_back({"v_max", bus.id, vm - bus.v_max});
    if (vm < bus.v_min - tol) rep.limit_violations.push_back({"v_min", bus.id, bus.v_min - vm});
  }
  for (size_t bi = 0; bi < c.branches.size(); ++bi) {
    const Branch& br = c.branches[bi];
    if (!br.status || br.rate <= 0) continue;
    const int i = adm.index_of(br.from);
    const int j = adm.index_of(br.to);
    const Complex y = 1.0 / Complex(br.r, br.x);
    const Complex cur = y * (v[i] - v[j]) + Complex(0, 0.5 * br.b_charging) * v[i];
    const double cap = br.rate / base;
    if (std::abs(cur) > cap + tol)
      rep.limit_violations.push_back({"i_max", static_cast<int>(bi), std::abs(cur) - cap});
  }
  for (int a = 0; a < s; ++a) {
    const int bus_id = kron.sync_buses[a];
    double p_min = 0, p_max = 0, q_min = 0, q_max = 0;
    for (const Generator& g : c.gens) {
      if (!g.status || g.bus != bus_id) continue;
      p_min += g.p_min / base;
      p_max += g.p_max / base;
      q_min += g.q_min / base;
      q_max += g.q_max / base;
    }
    const int pos = c.bus_index(bus_id);
    const double pg = inj[pos].real() + c.buses[pos].p_load / base;
    const double qg = inj[pos].imag() + c.buses[pos].q_load / base;
    if (pg > p_max + tol) rep.limit_violations.push_back({"p_max", bus_id, pg - p_max});
    if (pg < p_min - tol) rep.limit_violations.push_back({"p_min", bus_id, p_min - pg});
    if (qg > q_max + tol) rep.limit_violations.push_back({"q_max", bus_id, qg - q_max});
    if (qg < q_min - tol) rep.limit_violations.push_back({"q_min", bus_id, q_min - qg});
  }

  // cost and stability metric from the recovered operating point
  double cost = 0.0;
  for (const GenCost& gc : c.costs) {
    const int pos = c.bus_index(gc.bus);
    const double pg = inj[pos].real() + c.buses[pos].p_load / base;
    const double qg = inj[pos].imag() + c.buses[pos].q_load / base;
    cost += gc.c_p * pg + gc.c_q * qg;
  }
  rep.cost_recovered = cost;

  OperatingPoint op;
  op.e_mag.resize(s);
  op.e_ang.resize(s);
  for (int a = 0; a < s; ++a) {
    op.e_mag[a] = std::abs(e[a]);
    op.e_ang[a] = std::arg(e[a]);
  }
  LaplacianResult lap = laplacian_from_angles(op, kron);
  SwingSpectrum sp = spectrum(lap.L, inertia_vector(kron, dyn));
  sp.band = select_band(sp, band);
  rep.f_y_recovered = stability_metric(sp, gamma);
  return rep;
}

std::string ExactnessReport::to_json(int indent) const {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["rank_ratio_V"] = rank_ratio_V;
  j["rank_ratio_E"] = rank_ratio_E;
  j["max_pf_residual"] = max_pf_residual;
  j["f_y_recovered"] = f_y_recovered;
  j["cost_recovered"] = cost_recovered;
  auto phasors = [](const VectorXcd& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (int i = 0; i < v.size(); ++i)
      arr.push_back({{"re", v[i].real()}, {"im", v[i].imag()}});
    return arr;
  };
  j["recovered_v"] = phasors(recovered_v);
  j["recovered_e"] = phasors(recovered_e);
  j["limit_violations"] = nlohmann::json::array();
  for (const LimitViolation& lv : limit_violations)
    j["limit_violations"].push_back({{"kind", lv.kind}, {"id", lv.id}, {"amount", lv.amount}});
  return j.dump(indent);
}

}  // namespace oscillopf
