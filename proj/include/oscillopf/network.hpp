#pragma once

#include <map>
#include <vector>

#include "oscillopf/case.hpp"
#include "oscillopf/linalg.hpp"

namespace oscillopf {

/// Bus admittance matrix in pu, rows ordered as `bus_order`.
struct AdmittanceModel {
  MatrixXcd Y;
  std::vector<int> bus_order;  // row -> bus id

  int index_of(int bus_id) const;
};

/// Kron-reduced description of the synchronous subsystem.
struct KronModel {
  std::vector<int> sync_buses;  // ordered set S, bus ids
  MatrixXcd Gamma;              // S x S
  VectorXcd y_internal;         // diagonal of Y_S, entries 1/(j x_n)
  MatrixXd eff_reactance;       // gamma_nm > 0 where coupled, 0 otherwise
  bool has_edge(int a, int b) const { return eff_reactance(a, b) > 0.0; }

  /// Gamma * Y_S, the linear map from internal to external sync voltages.
  MatrixXcd coupling() const;
};

/// Hermitian quadratic forms for injections, voltages and line currents.
struct QuadraticForms {
  std::vector<MatrixXcd> M_p;             // per bus, injection active power
  std::vector<MatrixXcd> M_q;             // per bus, injection reactive power
  std::vector<MatrixXcd> M_v;             // per bus, squared voltage magnitude
  std::map<int, MatrixXcd> M_i;           // per branch index, squared from-end current
};

/// Standard pi-model Y-bus. Throws on a branch with r = x = 0.
AdmittanceModel build_ybus(const RawCase& c);

/// Schur-complement elimination of non-synchronous buses. `zero_threshold`
/// bounds |Im(Gamma_nm)| below which no effective edge is created.
KronModel kron_reduce(const AdmittanceModel& adm, const DynamicParams& dyn,
                      const std::vector<int>& sync_buses,
                      double zero_threshold = 1e-9);

QuadraticForms quadratic_forms(const AdmittanceModel& adm, const RawCase& c);

}  // namespace oscillopf
