#pragma once

#include <Eigen/Sparse>
#include <string>
#include <vector>

#include "oscillopf/linalg.hpp"

namespace oscillopf {

enum class ConeType { Free, NonNeg, Psd };

struct ConeSpec {
  ConeType type = ConeType::Free;
  int size = 0;  // coordinate count for Free/NonNeg, matrix dimension for Psd
  int coords() const { return type == ConeType::Psd ? svec_size(size) : size; }
};

struct LinTerm {
  int col = 0;
  double coeff = 0.0;
};

/// Sparse affine expression sum_i coeff_i x_{col_i} + constant.
struct LinExpr {
  std::vector<LinTerm> terms;
  double constant = 0.0;

  LinExpr& add(int col, double coeff) {
    if (coeff != 0.0) terms.push_back({col, coeff});
    return *this;
  }
  LinExpr& add(const LinTerm& t) { return add(t.col, t.coeff); }
  LinExpr& add_scaled(const LinExpr& e, double scale);
  double eval(const VectorXd& x) const;
};

/// Symmetric matrix of affine expressions, stored over the lower triangle in
/// svec ordering; entries hold the matrix values themselves (no sqrt 2).
struct SymExpr {
  int dim = 0;
  std::vector<LinExpr> entries;

  explicit SymExpr(int d = 0) : dim(d), entries(svec_size(d)) {}
  LinExpr& at(int i, int j) { return entries[svec_index(dim, i, j)]; }
  const LinExpr& at(int i, int j) const { return entries[svec_index(dim, i, j)]; }
  MatrixXd eval(const VectorXd& x) const;
};

enum class BlockKind { SymMatrix, Vector, Scalar };

struct VarBlock {
  std::string name;
  BlockKind kind = BlockKind::Scalar;
  int dim = 1;     // matrix dimension or vector length
  int offset = 0;  // first coordinate in the decision vector
  int size = 1;    // number of coordinates (svec size for matrices)
  bool psd = false;
};

/// Standard-form conic problem: min c'x + obj_constant, A x = b, x in the
/// product cone described by `cones` (segments cover the columns in order).
struct StandardForm {
  VectorXd c;
  double obj_constant = 0.0;
  Eigen::SparseMatrix<double> A;
  VectorXd b;
  std::vector<ConeSpec> cones;
  int named_coords = 0;  // leading coordinates owned by named blocks
};

/// Conic problem under construction: named variable blocks, a linear
/// objective, affine equalities and cone memberships.
class ConeProgram {
 public:
  int add_sym_block(const std::string& name, int dim);
  int add_vector_block(const std::string& name, int len);
  int add_scalar_block(const std::string& name);

  int num_coords() const { return next_coord_; }
  const VarBlock& block(int id) const { return blocks_.at(id); }
  const VarBlock& block(const std::string& name) const;
  bool has_block(const std::string& name) const;

  /// Coordinate of element i of a vector/scalar block.
  int coord(int block_id, int i = 0) const;
  /// Matrix entry X_ij expressed over the block's svec coordinate.
  LinTerm entry_term(int block_id, int i, int j) const;

  void add_objective_term(int col, double coeff) { objective_.add(col, coeff); }
  void add_objective(const LinExpr& e);
  const LinExpr& objective() const { return objective_; }

  void add_equality(LinExpr e) { equalities_.push_back(std::move(e)); }
  void add_nonneg(LinExpr e) { nonnegs_.push_back(std::move(e)); }
  void add_psd(SymExpr e) { psd_exprs_.push_back(std::move(e)); }
  /// Cone membership of a whole symmetric block (identity expression).
  void mark_block_psd(int block_id);

  size_t num_equalities() const { return equalities_.size(); }
  size_t num_nonneg() const { return nonnegs_.size(); }
  size_t num_psd_exprs() const { return psd_exprs_.size(); }
  const std::vector<VarBlock>& blocks() const { return blocks_; }

  /// Deterministic vectorized form: named blocks first (cone-tagged where
  /// marked), then one svec PSD variable per expression membership with its
  /// defining rows, then one nonnegative slack per scalar membership.
  StandardForm standard_form() const;

  /// Block evaluation from a flat decision vector (round-trip accessors).
  MatrixXd sym_value(const std::string& name, const VectorXd& x) const;
  VectorXd vector_value(const std::string& name, const VectorXd& x) const;
  double scalar_value(const std::string& name, const VectorXd& x) const;

 private:
  int add_block(const std::string& name, BlockKind kind, int dim, int size);

  std::vector<VarBlock> blocks_;
  LinExpr objective_;
  std::vector<LinExpr> equalities_;
  std::vector<LinExpr> nonnegs_;
  std::vector<SymExpr> psd_exprs_;
  int next_coord_ = 0;
};

}  // namespace oscillopf
