#pragma once

#include "oscillopf/cone_program.hpp"
#include "oscillopf/dynamics.hpp"
#include "oscillopf/network.hpp"

namespace oscillopf {

/// Scalarization weight, band choice and damping ratio of one OPF instance.
struct TradeoffConfig {
  double mu = 0.0;  // in [0, 1]
  BandSpec band = BandSpec::count(3);
  double gamma = 0.0;  // damping ratio; 0 = take from DynamicParams

  void validate() const;
};

/// Handles into the assembled stability-aware OPF cone program.
struct OpfModel {
  ConeProgram prog;
  std::vector<int> bus_order;   // N bus ids, case order
  std::vector<int> sync_buses;  // S bus ids, Kron order
  double base_mva = 100.0;
  double gamma = 0.0;
  int band_k = 0;
};

/// Appends the Lemma-1 epigraph machinery to `prog`: a PSD matrix Z, a scalar
/// s, the LMI [[Z + sI, W], [W, L_M]] >= 0 and the objective contribution
/// weight * (trace Z + K s)/(2 gamma). `w_projector` must equal
/// I - u1 u1^T with u1 = M^{1/2} 1 / ||M^{1/2} 1||. `balance` congruence-scales
/// the emitted LMI to [[balance (Z + sI), W], [W, L_M / balance]], which is
/// the same constraint on (Z, s, L_M) with better conditioned entries.
void build_lemma1_block(ConeProgram& prog, const SymExpr& l_m_expr,
                        const MatrixXd& w_projector, int k, double gamma,
                        double weight, double balance = 1.0);

/// Projector I - u1 u1^T from the inertia vector.
MatrixXd lemma1_projector(const VectorXd& inertias);

/// Standalone Lemma-1 program for a fixed numeric mass-scaled Laplacian.
ConeProgram make_lemma1_program(const MatrixXd& l_m, const VectorXd& inertias,
                                int k, double gamma);

/// Full SDP relaxation of the stability-aware OPF.
OpfModel build_opf_sdp(const RawCase& c, const KronModel& kron,
                       const QuadraticForms& forms, const DynamicParams& dyn,
                       const TradeoffConfig& cfg);

/// Coefficients of 0.5 * trace(V_emb * embed(C)) over the svec coordinates of
/// a 2n x 2n symmetric block; equals v^H C v on embedded rank-1 points.
LinExpr trace_form_expr(const ConeProgram& prog, int block_id, const MatrixXcd& C);

}  // namespace oscillopf
