#include "oscillopf/linalg.hpp"

#include <cmath>
#include <stdexcept>

namespace oscillopf {

namespace {
constexpr double kSqrt2 = 1.4142135623730950488;
}

int svec_index(int d, int i, int j) {
  if (j > i) std::swap(i, j);
  // Column j contributes (d - j) entries; offset of column j is
  // sum_{k<j} (d - k) = j*d - j(j-1)/2.
  return j * d - j * (j - 1) / 2 + (i - j);
}

VectorXd svec(const MatrixXd& X) {
  const int d = static_cast<int>(X.rows());
  VectorXd v(svec_size(d));
  int idx = 0;
  for (int j = 0; j < d; ++j) {
    v[idx++] = X(j, j);
    for (int i = j + 1; i < d; ++i) v[idx++] = kSqrt2 * 0.5 * (X(i, j) + X(j, i));
  }
  return v;
}

MatrixXd smat(const VectorXd& v) {
  const int m = static_cast<int>(v.size());
  const int d = static_cast<int>((std::sqrt(8.0 * m + 1.0) - 1.0) / 2.0 + 0.5);
  if (svec_size(d) != m) throw std::invalid_argument("smat: size is not triangular");
  MatrixXd X(d, d);
  int idx = 0;
  for (int j = 0; j < d; ++j) {
    X(j, j) = v[idx++];
    for (int i = j + 1; i < d; ++i) {
      X(i, j) = X(j, i) = v[idx++] / kSqrt2;
    }
  }
  return X;
}

MatrixXd hermitian_embed(const MatrixXcd& H, double tol) {
  const double scale = std::max(1.0, H.norm());
  if ((H - H.adjoint()).norm() > tol * scale)
    throw std::invalid_argument("hermitian_embed: input is not Hermitian");
  return complex_embed(0.5 * (H + H.adjoint().eval()));
}

MatrixXd complex_embed(const MatrixXcd& A) {
  const int n = static_cast<int>(A.rows());
  const int m = static_cast<int>(A.cols());
  MatrixXd E(2 * n, 2 * m);
  E.topLeftCorner(n, m) = A.real();
  E.topRightCorner(n, m) = -A.imag();
  E.bottomLeftCorner(n, m) = A.imag();
  E.bottomRightCorner(n, m) = A.real();
  return E;
}

MatrixXcd complexify(const MatrixXd& X) {
  const int n2 = static_cast<int>(X.rows());
  if (n2 % 2 != 0) throw std::invalid_argument("complexify: odd dimension");
  const int n = n2 / 2;
  MatrixXd re = 0.5 * (X.topLeftCorner(n, n) + X.bottomRightCorner(n, n));
  MatrixXd im = 0.5 * (X.bottomLeftCorner(n, n) - X.topRightCorner(n, n));
  MatrixXcd H = re.cast<Complex>() + Complex(0, 1) * im.cast<Complex>();
  return 0.5 * (H + H.adjoint().eval());
}

}  // namespace oscillopf
