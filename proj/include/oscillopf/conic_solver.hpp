#pragma once

#include <string>

#include "oscillopf/cone_program.hpp"

namespace oscillopf {

enum class SolveStatus { Optimal, Infeasible, Unbounded, MaxIter, NumericalError };

std::string status_name(SolveStatus s);

struct SolverSettings {
  double tol = 1e-8;   // relative duality gap and KKT residual target
  int max_iter = 200;
  int stall_limit = 5;  // consecutive iterations without centrality progress
  bool verbose = false;
};

struct ConicSolution {
  SolveStatus status = SolveStatus::NumericalError;
  VectorXd primal;       // full decision vector of the input problem
  VectorXd dual;         // equality multipliers, one per input row
  VectorXd cone_dual;    // z, one per input coordinate (zero on free segments)
  double primal_obj = 0.0;
  double dual_obj = 0.0;
  double gap = 0.0;      // |primal_obj - dual_obj| / (1 + |primal_obj|)
  int iterations = 0;
  double solve_time = 0.0;  // seconds

  bool optimal() const { return status == SolveStatus::Optimal; }
};

/// Equality-constrained problem with every variable in a proper cone; free
/// columns of the input have been pivoted out of the equalities (with a
/// plus/minus split as fallback) and duplicate rows dropped.
struct PresolvedProblem {
  VectorXd c;
  double obj_constant = 0.0;
  Eigen::SparseMatrix<double> A;
  VectorXd b;
  std::vector<ConeSpec> cones;

  SolveStatus early_status = SolveStatus::Optimal;  // != Optimal when presolve decided
  bool decided = false;

  VectorXd expand_primal(const VectorXd& x_reduced) const;
  VectorXd recover_duals(const VectorXd& y_reduced) const;
  VectorXd expand_cone_dual(const VectorXd& z_reduced) const;

  // bookkeeping, populated by presolve()
  struct PivotRecord {
    int col = 0;
    double pivot = 0.0;
    std::vector<LinTerm> row;  // remaining coefficients at elimination time
    double rhs = 0.0;
    int orig_row = 0;
  };
  struct UpdateRecord {
    int pivot_row = 0;
    int target_row = 0;
    double factor = 0.0;
  };
  int orig_cols = 0;
  int orig_rows = 0;
  std::vector<PivotRecord> stack;        // in elimination order
  std::vector<UpdateRecord> updates;     // in application order
  std::vector<int> kept_rows;            // reduced row -> original row
  std::vector<int> kept_cols;            // reduced col -> original col
  std::vector<int> dup_of;               // original row -> surviving row (or self)
  std::vector<double> row_scale;         // original row scaling applied
  std::vector<std::pair<int, int>> split_cols;  // original col -> (plus, minus) reduced cols
  VectorXd c_orig;
};

PresolvedProblem presolve(const StandardForm& prob);

/// Primal-dual path-following with Nesterov-Todd scaling on the homogeneous
/// self-dual embedding; dense normal-equation KKT solves.
ConicSolution solve(const StandardForm& prob, const SolverSettings& settings = {});

}  // namespace oscillopf
