#pragma once

#include <string>
#include <vector>

#include "oscillopf/dynamics.hpp"
#include "oscillopf/network.hpp"

namespace oscillopf {

struct LimitViolation {
  std::string kind;  // "v_max", "v_min", "i_max", "p_max", "p_min", "q_max", "q_min"
  int id = 0;        // bus id or branch index
  double amount = 0.0;
};

struct ExactnessReport {
  double rank_ratio_V = 0.0;
  double rank_ratio_E = 0.0;
  VectorXcd recovered_v;  // N, reference angle zero
  VectorXcd recovered_e;  // S
  double max_pf_residual = 0.0;  // pu
  std::vector<LimitViolation> limit_violations;
  double f_y_recovered = 0.0;
  double cost_recovered = 0.0;

  std::string to_json(int indent = 2) const;
};

/// lambda_2 / lambda_1 with eigenvalues of a Hermitian PSD matrix sorted
/// descending; zero for exact rank 1. Throws on a (near) zero matrix.
double rank1_ratio(const MatrixXcd& X);

/// Rank-1 factor sqrt(lambda_1) u_1 rotated so that angle(v[ref_pos]) = 0.
/// Refuses when rank1_ratio(X) exceeds `threshold`.
VectorXcd extract_voltages(const MatrixXcd& X, int ref_pos, double threshold = 1e-3);

/// Best rank-1 factor without any exactness gate (used when flagging
/// relaxation gaps while letting sweeps complete).
VectorXcd rank1_factor(const MatrixXcd& X, int ref_pos);

/// Evaluate the original nonconvex constraints at a recovered point and
/// recompute cost and f_y from scalars. `p_g_sdp`/`q_g_sdp` are the lifted
/// dispatch values (pu, Kron order) used for the balance residual check.
ExactnessReport verify_dispatch(const VectorXcd& v, const VectorXcd& e,
                                const RawCase& c, const AdmittanceModel& adm,
                                const KronModel& kron, const DynamicParams& dyn,
                                double gamma, const BandSpec& band,
                                const VectorXd& p_g_sdp, const VectorXd& q_g_sdp);

}  // namespace oscillopf
