#pragma once

#include <Eigen/Dense>
#include <complex>

namespace oscillopf {

using Complex = std::complex<double>;
using MatrixXcd = Eigen::MatrixXcd;
using MatrixXd = Eigen::MatrixXd;
using VectorXd = Eigen::VectorXd;
using VectorXcd = Eigen::VectorXcd;

/// Number of coordinates in the scaled vectorization of a d x d symmetric matrix.
constexpr int svec_size(int d) { return d * (d + 1) / 2; }

/// Flat index of entry (i, j), i >= j, in svec ordering (lower triangle, column major).
int svec_index(int d, int i, int j);

/// Scaled vectorization: off-diagonal entries multiplied by sqrt(2) so that
/// svec(X) . svec(Y) = trace(X Y).
VectorXd svec(const MatrixXd& X);

/// Inverse of svec.
MatrixXd smat(const VectorXd& v);

/// Real symmetric embedding [[Re H, -Im H], [Im H, Re H]] of a Hermitian matrix.
/// H is PSD iff the embedding is PSD, and trace(embedding) = 2 trace(H).
/// Throws if H is not Hermitian within `tol`.
MatrixXd hermitian_embed(const MatrixXcd& H, double tol = 1e-9);

/// Embedding of a general (non-Hermitian) complex matrix; the result is not
/// symmetric in general but satisfies embed(A B) = embed(A) embed(B) and
/// embed(A^H) = embed(A)^T.
MatrixXd complex_embed(const MatrixXcd& A);

/// Recover the Hermitian matrix represented by a 2n x 2n real symmetric block.
/// Averages over the embedding symmetry, so off-structure components of X are
/// projected out: H = (P11 + P22)/2 + i (P21 - P12)/2.
MatrixXcd complexify(const MatrixXd& X);

}  // namespace oscillopf
