#include "oscillopf/cone_program.hpp"

#include <cmath>

#include "oscillopf/case.hpp"

namespace oscillopf {

namespace {
constexpr double kSqrt2 = 1.4142135623730950488;
}

LinExpr& LinExpr::add_scaled(const LinExpr& e, double scale) {
  for (const LinTerm& t : e.terms) add(t.col, scale * t.coeff);
  constant += scale * e.constant;
  return *this;
}

double LinExpr::eval(const VectorXd& x) const {
  double v = constant;
  for (const LinTerm& t : terms) v += t.coeff * x[t.col];
  return v;
}

MatrixXd SymExpr::eval(const VectorXd& x) const {
  MatrixXd X(dim, dim);
  for (int j = 0; j < dim; ++j)
    for (int i = j; i < dim; ++i) X(i, j) = X(j, i) = at(i, j).eval(x);
  return X;
}

int ConeProgram::add_block(const std::string& name, BlockKind kind, int dim, int size) {
  if (has_block(name)) throw Error("duplicate variable block '" + name + "'");
  VarBlock b;
  b.name = name;
  b.kind = kind;
  b.dim = dim;
  b.offset = next_coord_;
  b.size = size;
  next_coord_ += size;
  blocks_.push_back(b);
  return static_cast<int>(blocks_.size()) - 1;
}

int ConeProgram::add_sym_block(const std::string& name, int dim) {
  return add_block(name, BlockKind::SymMatrix, dim, svec_size(dim));
}

int ConeProgram::add_vector_block(const std::string& name, int len) {
  return add_block(name, BlockKind::Vector, len, len);
}

int ConeProgram::add_scalar_block(const std::string& name) {
  return add_block(name, BlockKind::Scalar, 1, 1);
}

const VarBlock& ConeProgram::block(const std::string& name) const {
  for (const VarBlock& b : blocks_)
    if (b.name == name) return b;
  throw Error("unknown variable block '" + name + "'");
}

bool ConeProgram::has_block(const std::string& name) const {
  for (const VarBlock& b : blocks_)
    if (b.name == name) return true;
  return false;
}

int ConeProgram::coord(int block_id, int i) const {
  const VarBlock& b = blocks_.at(block_id);
  if (b.kind == BlockKind::SymMatrix)
    throw Error("coord() is for vector/scalar blocks; use entry_term");
  if (i < 0 || i >= b.size) throw Error("coordinate out of range");
  return b.offset + i;
}

LinTerm ConeProgram::entry_term(int block_id, int i, int j) const {
  const VarBlock& b = blocks_.at(block_id);
  if (b.kind != BlockKind::SymMatrix) throw Error("entry_term() needs a matrix block");
  const int idx = svec_index(b.dim, i, j);
  return {b.offset + idx, i == j ? 1.0 : 1.0 / kSqrt2};
}

void ConeProgram::add_objective(const LinExpr& e) {
  objective_.add_scaled(e, 1.0);
}

void ConeProgram::mark_block_psd(int block_id) {
  VarBlock& b = blocks_.at(block_id);
  if (b.kind != BlockKind::SymMatrix) throw Error("only matrix blocks can be PSD");
  b.psd = true;
}

StandardForm ConeProgram::standard_form() const {
  StandardForm f;
  int n = next_coord_;
  f.named_coords = n;

  // Cone layout over the named blocks.
  for (const VarBlock& b : blocks_) {
    if (b.psd)
      f.cones.push_back({ConeType::Psd, b.dim});
    else
      f.cones.push_back({ConeType::Free, b.size});
  }

  std::vector<int> psd_offsets;
  for (const SymExpr& e : psd_exprs_) {
    psd_offsets.push_back(n);
    f.cones.push_back({ConeType::Psd, e.dim});
    n += svec_size(e.dim);
  }
  const int slack_offset = n;
  if (!nonnegs_.empty()) {
    f.cones.push_back({ConeType::NonNeg, static_cast<int>(nonnegs_.size())});
    n += static_cast<int>(nonnegs_.size());
  }

  std::vector<Eigen::Triplet<double>> trips;
  std::vector<double> rhs;
  auto emit = [&](const LinExpr& e, int extra_col, double extra_coeff) {
    const int row = static_cast<int>(rhs.size());
    for (const LinTerm& t : e.terms) trips.emplace_back(row, t.col, t.coeff);
    if (extra_col >= 0) trips.emplace_back(row, extra_col, extra_coeff);
    rhs.push_back(-e.constant);
  };

  for (const LinExpr& e : equalities_) emit(e, -1, 0.0);
  for (size_t k = 0; k < psd_exprs_.size(); ++k) {
    const SymExpr& e = psd_exprs_[k];
    int idx = 0;
    for (int j = 0; j < e.dim; ++j) {
      for (int i = j; i < e.dim; ++i, ++idx) {
        LinExpr scaled;
        scaled.add_scaled(e.at(i, j), i == j ? 1.0 : kSqrt2);
        emit(scaled, psd_offsets[k] + idx, -1.0);
      }
    }
  }
  for (size_t k = 0; k < nonnegs_.size(); ++k)
    emit(nonnegs_[k], slack_offset + static_cast<int>(k), -1.0);

  f.A.resize(static_cast<int>(rhs.size()), n);
  f.A.setFromTriplets(trips.begin(), trips.end());
  f.b = Eigen::Map<const VectorXd>(rhs.data(), static_cast<long>(rhs.size()));

  f.c = VectorXd::Zero(n);
  for (const LinTerm& t : objective_.terms) f.c[t.col] += t.coeff;
  f.obj_constant = objective_.constant;
  return f;
}

MatrixXd ConeProgram::sym_value(const std::string& name, const VectorXd& x) const {
  const VarBlock& b = block(name);
  if (b.kind != BlockKind::SymMatrix) throw Error("'" + name + "' is not a matrix block");
  return smat(x.segment(b.offset, b.size));
}

VectorXd ConeProgram::vector_value(const std::string& name, const VectorXd& x) const {
  const VarBlock& b = block(name);
  if (b.kind != BlockKind::Vector) throw Error("'" + name + "' is not a vector block");
  return x.segment(b.offset, b.size);
}

double ConeProgram::scalar_value(const std::string& name, const VectorXd& x) const {
  const VarBlock& b = block(name);
  if (b.kind != BlockKind::Scalar) throw Error("'" + name + "' is not a scalar block");
  return x[b.offset];
}

}  // namespace oscillopf
