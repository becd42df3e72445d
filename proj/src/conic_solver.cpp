#include "oscillopf/conic_solver.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>

#include "oscillopf/case.hpp"

namespace oscillopf {

std::string status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::MaxIter: return "max_iter";
    case SolveStatus::NumericalError: return "numerical_error";
  }
  return "unknown";
}

namespace {

constexpr double kSqrt2 = 1.4142135623730950488;
constexpr double kInf = std::numeric_limits<double>::infinity();

struct Block {
  ConeType type;
  int dim;     // matrix dim for Psd, count otherwise
  int offset;  // first coordinate
  int len;     // coordinate count
};

// Per-block Nesterov-Todd scaling state.
struct Scaling {
  VectorXd w;  // nonneg: sqrt(x/z)
  // psd: R with R^-1 X R^-T = R^T Z R = diag(sig)
  MatrixXd R, Rinv, Wmat;  // Wmat = R R^T
  VectorXd sig;
  VectorXd lam;     // scaled point in svec coords
  VectorXd lamfac;  // Jordan factors (sig_i + sig_j)/2 per svec coord
};

struct RowsInBlock {
  std::vector<int> rows;
  std::vector<std::vector<LinTerm>> local;
  bool dense = false;
  MatrixXd Adense;
};

class Ipm {
 public:
  Ipm(const PresolvedProblem& ps, const SolverSettings& st) : ps_(ps), st_(st) {
    n_ = static_cast<int>(ps.c.size());
    p_ = static_cast<int>(ps.b.size());
    int off = 0;
    for (const ConeSpec& cs : ps.cones) {
      Block b{cs.type, cs.size, off, cs.coords()};
      off += b.len;
      blocks_.push_back(b);
      deg_ += cs.size;  // barrier degree: count for nonneg, dim for psd
    }
    At_ = ps.A.transpose();
    index_rows();
  }

  ConicSolution run();

 private:
  void index_rows();
  VectorXd cone_identity() const;
  double min_eig(const VectorXd& v) const;
  bool cone_interior(const VectorXd& v) const;
  void compute_scalings(const VectorXd& x, const VectorXd& z);
  VectorXd apply_Hinv(const VectorXd& v) const;    // congruence by W W^T
  VectorXd apply_Winv_t(const VectorXd& v) const;  // W^-T
  VectorXd apply_W(const VectorXd& v) const;
  VectorXd apply_Winv(const VectorXd& v) const;
  VectorXd jordan(const VectorXd& u, const VectorXd& v) const;
  VectorXd lam_sq() const;  // lam o lam
  VectorXd lam_jordan_inv(const VectorXd& v) const;
  VectorXd lam_jordan(const VectorXd& v) const;
  double step_to_boundary(const VectorXd& v, const VectorXd& dv) const;
  void assemble_normal_matrix(MatrixXd& M) const;
  bool factorize(MatrixXd M);
  VectorXd solve_normal(const VectorXd& rhs) const;

  const PresolvedProblem& ps_;
  SolverSettings st_;
  int n_ = 0, p_ = 0, deg_ = 0;
  std::vector<Block> blocks_;
  std::vector<RowsInBlock> rows_in_block_;
  Eigen::SparseMatrix<double> At_;
  std::vector<Scaling> scal_;
  Eigen::LLT<MatrixXd> llt_;
  MatrixXd Mwork_;
};

void Ipm::index_rows() {
  rows_in_block_.resize(blocks_.size());
  Eigen::SparseMatrix<double, Eigen::RowMajor> Ar(ps_.A);
  std::vector<int> block_of(n_);
  for (size_t k = 0; k < blocks_.size(); ++k)
    for (int i = 0; i < blocks_[k].len; ++i) block_of[blocks_[k].offset + i] = static_cast<int>(k);

  std::vector<std::vector<std::pair<int, std::vector<LinTerm>>>> tmp(blocks_.size());
  for (int r = 0; r < p_; ++r) {
    std::vector<std::vector<LinTerm>> per(blocks_.size());
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(Ar, r); it; ++it) {
      const int k = block_of[static_cast<int>(it.col())];
      per[k].push_back({static_cast<int>(it.col()) - blocks_[k].offset, it.value()});
    }
    for (size_t k = 0; k < blocks_.size(); ++k)
      if (!per[k].empty()) tmp[k].push_back({r, std::move(per[k])});
  }
  for (size_t k = 0; k < blocks_.size(); ++k) {
    RowsInBlock& rb = rows_in_block_[k];
    size_t nnz = 0;
    for (auto& [r, terms] : tmp[k]) {
      rb.rows.push_back(r);
      nnz += terms.size();
      rb.local.push_back(std::move(terms));
    }
    if (blocks_[k].type == ConeType::Psd && !rb.rows.empty()) {
      const double avg = static_cast<double>(nnz) / static_cast<double>(rb.rows.size());
      rb.dense = avg > 8.0;
      if (rb.dense) {
        rb.Adense = MatrixXd::Zero(static_cast<int>(rb.rows.size()), blocks_[k].len);
        for (size_t i = 0; i < rb.rows.size(); ++i)
          for (const LinTerm& t : rb.local[i]) rb.Adense(static_cast<int>(i), t.col) = t.coeff;
      }
    }
  }
}

VectorXd Ipm::cone_identity() const {
  VectorXd e = VectorXd::Zero(n_);
  for (const Block& b : blocks_) {
    if (b.type == ConeType::NonNeg) {
      e.segment(b.offset, b.len).setOnes();
    } else {
      int idx = 0;
      for (int j = 0; j < b.dim; ++j) {
        e[b.offset + idx] = 1.0;
        idx += b.dim - j;
      }
    }
  }
  return e;
}

double Ipm::min_eig(const VectorXd& v) const {
  double m = kInf;
  for (const Block& b : blocks_) {
    if (b.type == ConeType::NonNeg) {
      if (b.len > 0) m = std::min(m, v.segment(b.offset, b.len).minCoeff());
    } else {
      MatrixXd X = smat(v.segment(b.offset, b.len));
      Eigen::SelfAdjointEigenSolver<MatrixXd> eig(X, Eigen::EigenvaluesOnly);
      m = std::min(m, eig.eigenvalues().minCoeff());
    }
  }
  return m == kInf ? 0.0 : m;
}

bool Ipm::cone_interior(const VectorXd& v) const {
  for (const Block& b : blocks_) {
    if (b.type == ConeType::NonNeg) {
      if (b.len > 0 && !(v.segment(b.offset, b.len).minCoeff() > 0)) return false;
    } else {
      Eigen::LLT<MatrixXd> llt(smat(v.segment(b.offset, b.len)));
      if (llt.info() != Eigen::Success) return false;
    }
  }
  return true;
}

void Ipm::compute_scalings(const VectorXd& x, const VectorXd& z) {
  scal_.resize(blocks_.size());
  for (size_t k = 0; k < blocks_.size(); ++k) {
    const Block& b = blocks_[k];
    Scaling& s = scal_[k];
    if (b.type == ConeType::NonNeg) {
      VectorXd xb = x.segment(b.offset, b.len);
      VectorXd zb = z.segment(b.offset, b.len);
      if ((xb.array() <= 0).any() || (zb.array() <= 0).any())
        throw Error("conic solve: iterate left the nonnegative cone");
      s.w = (xb.array() / zb.array()).sqrt().matrix();
      s.lam = (xb.array() * zb.array()).sqrt().matrix();
    } else {
      MatrixXd X = smat(x.segment(b.offset, b.len));
      MatrixXd Z = smat(z.segment(b.offset, b.len));
      Eigen::LLT<MatrixXd> lx(X), lz(Z);
      if (lx.info() != Eigen::Success || lz.info() != Eigen::Success)
        throw Error("conic solve: iterate left the PSD cone");
      MatrixXd Lx = lx.matrixL();
      MatrixXd Lz = lz.matrixL();
      Eigen::BDCSVD<MatrixXd> svd(MatrixXd(Lz.transpose() * Lx),
                                  Eigen::ComputeThinU | Eigen::ComputeThinV);
      VectorXd sig = svd.singularValues();
      // structurally singular blocks drive sigma to zero along the path;
      // clamping keeps the scaling finite without changing its limit
      const double floor_sig = 1e-14 * std::max(1.0, sig.maxCoeff());
      for (int i = 0; i < sig.size(); ++i) sig[i] = std::max(sig[i], floor_sig);
      VectorXd isqrt = sig.cwiseSqrt().cwiseInverse();
      s.R = Lx * svd.matrixV() * isqrt.asDiagonal();
      s.Rinv = isqrt.asDiagonal() * svd.matrixU().transpose() * Lz.transpose();
      s.Wmat = s.R * s.R.transpose();
      s.sig = sig;
      s.lam.resize(b.len);
      s.lamfac.resize(b.len);
      int idx = 0;
      for (int j = 0; j < b.dim; ++j) {
        for (int i = j; i < b.dim; ++i, ++idx) {
          s.lam[idx] = i == j ? sig[j] : 0.0;
          s.lamfac[idx] = 0.5 * (sig[i] + sig[j]);
        }
      }
    }
  }
}

VectorXd Ipm::apply_Hinv(const VectorXd& v) const {
  VectorXd out(n_);
  for (size_t k = 0; k < blocks_.size(); ++k) {
    const Block& b = blocks_[k];
    const Scaling& s = scal_[k];
    if (b.type == ConeType::NonNeg)
      out.segment(b.offset, b.len) =
          v.segment(b.offset, b.len).cwiseProduct(s.w.cwiseProduct(s.w));
    else
      out.segment(b.offset, b.len) = svec(s.Wmat * smat(v.segment(b.offset, b.len)) * s.Wmat);
  }
  return out;
}

VectorXd Ipm::apply_Winv_t(const VectorXd& v) const {
  VectorXd out(n_);
  for (size_t k = 0; k < blocks_.size(); ++k) {
    const Block& b = blocks_[k];
    const Scaling& s = scal_[k];
    if (b.type == ConeType::NonNeg)
      out.segment(b.offset, b.len) = v.segment(b.offset, b.len).cwiseQuotient(s.w);
    else
      out.segment(b.offset, b.len) =
          svec(s.Rinv * smat(v.segment(b.offset, b.len)) * s.Rinv.transpose());
  }
  return out;
}

VectorXd Ipm::apply_W(const VectorXd& v) const {
  VectorXd out(n_);
  for (size_t k = 0; k < blocks_.size(); ++k) {
    const Block& b = blocks_[k];
    const Scaling& s = scal_[k];
    if (b.type == ConeType::NonNeg)
      out.segment(b.offset, b.len) = v.segment(b.offset, b.len).cwiseProduct(s.w);
    else
      out.segment(b.offset, b.len) =
          svec(s.R.transpose() * smat(v.segment(b.offset, b.len)) * s.R);
  }
  return out;
}

VectorXd Ipm::apply_Winv(const VectorXd& v) const {
  VectorXd out(n_);
  for (size_t k = 0; k < blocks_.size(); ++k) {
    const Block& b = blocks_[k];
    const Scaling& s = scal_[k];
    if (b.type == ConeType::NonNeg)
      out.segment(b.offset, b.len) = v.segment(b.offset, b.len).cwiseQuotient(s.w);
    else
      out.segment(b.offset, b.len) =
          svec(s.Rinv.transpose() * smat(v.segment(b.offset, b.len)) * s.Rinv);
  }
  return out;
}

VectorXd Ipm::jordan(const VectorXd& u, const VectorXd& v) const {
  VectorXd out(n_);
  for (const Block& b : blocks_) {
    if (b.type == ConeType::NonNeg) {
      out.segment(b.offset, b.len) =
          u.segment(b.offset, b.len).cwiseProduct(v.segment(b.offset, b.len));
    } else {
      MatrixXd U = smat(u.segment(b.offset, b.len));
      MatrixXd V = smat(v.segment(b.offset, b.len));
      out.segment(b.offset, b.len) = svec(0.5 * (U * V + V * U));
    }
  }
  return out;
}

VectorXd Ipm::lam_sq() const {
  VectorXd out = VectorXd::Zero(n_);
  for (size_t k = 0; k < blocks_.size(); ++k) {
    const Block& b = blocks_[k];
    const Scaling& s = scal_[k];
    if (b.type == ConeType::NonNeg) {
      out.segment(b.offset, b.len) = s.lam.cwiseProduct(s.lam);
    } else {
      int idx = 0;
      for (int j = 0; j < b.dim; ++j) {
        out[b.offset + idx] = s.sig[j] * s.sig[j];
        idx += b.dim - j;
      }
    }
  }
  return out;
}

VectorXd Ipm::lam_jordan_inv(const VectorXd& v) const {
  VectorXd out(n_);
  for (size_t k = 0; k < blocks_.size(); ++k) {
    const Block& b = blocks_[k];
    const Scaling& s = scal_[k];
    if (b.type == ConeType::NonNeg)
      out.segment(b.offset, b.len) = v.segment(b.offset, b.len).cwiseQuotient(s.lam);
    else
      out.segment(b.offset, b.len) = v.segment(b.offset, b.len).cwiseQuotient(s.lamfac);
  }
  return out;
}

VectorXd Ipm::lam_jordan(const VectorXd& v) const {
  VectorXd out(n_);
  for (size_t k = 0; k < blocks_.size(); ++k) {
    const Block& b = blocks_[k];
    const Scaling& s = scal_[k];
    if (b.type == ConeType::NonNeg)
      out.segment(b.offset, b.len) = v.segment(b.offset, b.len).cwiseProduct(s.lam);
    else
      out.segment(b.offset, b.len) = v.segment(b.offset, b.len).cwiseProduct(s.lamfac);
  }
  return out;
}

double Ipm::step_to_boundary(const VectorXd& v, const VectorXd& dv) const {
  double alpha = kInf;
  for (const Block& b : blocks_) {
    if (b.type == ConeType::NonNeg) {
      for (int i = 0; i < b.len; ++i) {
        const double d = dv[b.offset + i];
        if (d < 0) alpha = std::min(alpha, -v[b.offset + i] / d);
      }
    } else {
      MatrixXd X = smat(v.segment(b.offset, b.len));
      MatrixXd D = smat(dv.segment(b.offset, b.len));
      Eigen::LLT<MatrixXd> lx(X);
      if (lx.info() != Eigen::Success) return 0.0;
      MatrixXd L = lx.matrixL();
      MatrixXd S = L.triangularView<Eigen::Lower>().solve(D);
      S = L.triangularView<Eigen::Lower>().solve(S.transpose()).transpose();
      Eigen::SelfAdjointEigenSolver<MatrixXd> eig(0.5 * (S + S.transpose()),
                                                  Eigen::EigenvaluesOnly);
      const double m = eig.eigenvalues().minCoeff();
      if (m < 0) alpha = std::min(alpha, -1.0 / m);
    }
  }
  return alpha;
}

void Ipm::assemble_normal_matrix(MatrixXd& M) const {
  M.setZero(p_, p_);
  for (size_t k = 0; k < blocks_.size(); ++k) {
    const Block& b = blocks_[k];
    const RowsInBlock& rb = rows_in_block_[k];
    const Scaling& s = scal_[k];
    if (rb.rows.empty()) continue;
    const int nr = static_cast<int>(rb.rows.size());

    if (b.type == ConeType::NonNeg) {
      const VectorXd w2 = s.w.cwiseProduct(s.w);
      // per-coordinate rank-one updates; nonneg coords touch few rows
      std::vector<std::vector<std::pair<int, double>>> by_coord(b.len);
      for (int i = 0; i < nr; ++i)
        for (const LinTerm& t : rb.local[i]) by_coord[t.col].push_back({rb.rows[i], t.coeff});
      for (int cidx = 0; cidx < b.len; ++cidx) {
        const auto& entries = by_coord[cidx];
        for (size_t a = 0; a < entries.size(); ++a)
          for (size_t c2 = a; c2 < entries.size(); ++c2) {
            int r1 = entries[a].first, r2 = entries[c2].first;
            double v = w2[cidx] * entries[a].second * entries[c2].second;
            if (r1 <= r2)
              M(r1, r2) += v;
            else
              M(r2, r1) += v;
          }
      }
      continue;
    }

    if (rb.dense) {
      MatrixXd B(nr, b.len);
      for (int i = 0; i < nr; ++i) {
        MatrixXd Xi = smat(rb.Adense.row(i).transpose());
        B.row(i) = svec(s.Wmat * Xi * s.Wmat).transpose();
      }
      MatrixXd C = B * rb.Adense.transpose();
      for (int i = 0; i < nr; ++i)
        for (int j = i; j < nr; ++j) {
          int r1 = rb.rows[i], r2 = rb.rows[j];
          double v = 0.5 * (C(i, j) + C(j, i));
          if (r1 <= r2)
            M(r1, r2) += v;
          else
            M(r2, r1) += v;
        }
    } else {
      const int d = b.dim;
      std::vector<std::array<int, 2>> ij(svec_size(d));
      {
        int idx = 0;
        for (int j = 0; j < d; ++j)
          for (int i = j; i < d; ++i, ++idx) ij[idx] = {i, j};
      }
      auto sfac = [&](int idx) { return ij[idx][0] == ij[idx][1] ? 1.0 : kSqrt2; };
      for (int r1 = 0; r1 < nr; ++r1) {
        for (int r2 = r1; r2 < nr; ++r2) {
          double acc = 0.0;
          for (const LinTerm& ta : rb.local[r1]) {
            const int i = ij[ta.col][0], j = ij[ta.col][1];
            const double sa = sfac(ta.col) * ta.coeff;
            for (const LinTerm& tb : rb.local[r2]) {
              const int kk = ij[tb.col][0], ll = ij[tb.col][1];
              acc += 0.5 * sa * sfac(tb.col) * tb.coeff *
                     (s.Wmat(i, kk) * s.Wmat(j, ll) + s.Wmat(i, ll) * s.Wmat(j, kk));
            }
          }
          int ra = rb.rows[r1], rbw = rb.rows[r2];
          if (ra <= rbw)
            M(ra, rbw) += acc;
          else
            M(rbw, ra) += acc;
        }
      }
    }
  }
  M = MatrixXd(M.selfadjointView<Eigen::Upper>());
}

bool Ipm::factorize(MatrixXd M) {
  double ridge = 0.0;
  const double scale = std::max(1.0, M.diagonal().cwiseAbs().maxCoeff());
  for (int attempt = 0; attempt < 5; ++attempt) {
    if (ridge > 0) M.diagonal().array() += ridge;
    llt_.compute(M);
    if (llt_.info() == Eigen::Success) return true;
    ridge = ridge == 0 ? 1e-12 * scale : ridge * 1e3;
  }
  return false;
}

VectorXd Ipm::solve_normal(const VectorXd& rhs) const {
  VectorXd u = llt_.solve(rhs);
  VectorXd r = rhs - Mwork_ * u;
  if (r.norm() > 1e-11 * (1.0 + rhs.norm())) {
    u += llt_.solve(r);
    r = rhs - Mwork_ * u;
    if (r.norm() > 1e-9 * (1.0 + rhs.norm())) u += llt_.solve(r);
  }
  return u;
}

ConicSolution Ipm::run() {
  const auto t0 = std::chrono::steady_clock::now();
  ConicSolution out;
  auto finish = [&](SolveStatus stt, const VectorXd& x, const VectorXd& y, const VectorXd& z,
                    double tau, int iters) {
    out.status = stt;
    const double t = tau > 0 ? tau : 1.0;
    VectorXd xs = x / t, ys = y / t, zs = z / t;
    out.primal = ps_.expand_primal(xs);
    out.dual = ps_.recover_duals(ys);
    out.cone_dual = ps_.expand_cone_dual(zs);
    out.primal_obj = ps_.c.dot(xs) + ps_.obj_constant;
    out.dual_obj = ps_.b.dot(ys) + ps_.obj_constant;
    out.gap = std::abs(out.primal_obj - out.dual_obj) / (1.0 + std::abs(out.primal_obj));
    out.iterations = iters;
    out.solve_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
  };

  if (n_ == 0) {
    VectorXd empty;
    return finish(SolveStatus::Optimal, empty, VectorXd::Zero(p_), empty, 1.0, 0);
  }

  const VectorXd e = cone_identity();
  const VectorXd& c = ps_.c;
  const VectorXd& b = ps_.b;

  VectorXd x, y, z;
  {
    if (p_ > 0) {
      Mwork_ = MatrixXd(ps_.A * At_);
      if (!factorize(Mwork_))
        return finish(SolveStatus::NumericalError, e, VectorXd::Zero(p_), e, 1.0, 0);
      x = At_ * llt_.solve(b);
      y = llt_.solve(ps_.A * c);
      z = c - At_ * y;
    } else {
      x = VectorXd::Zero(n_);
      y = VectorXd::Zero(0);
      z = c;
    }
    const double mx = min_eig(x);
    const double mz = min_eig(z);
    x += (std::max(0.0, -1.1 * mx) + 1.0) * e;
    z += (std::max(0.0, -1.1 * mz) + 1.0) * e;
  }
  double tau = 1.0, kappa = 1.0;

  const double norm_b = 1.0 + (b.size() ? b.lpNorm<Eigen::Infinity>() : 0.0);
  const double norm_c = 1.0 + c.lpNorm<Eigen::Infinity>();

  VectorXd best_x = x, best_y = y, best_z = z;
  double best_tau = tau, best_metric = kInf;
  int stalled = 0;
  double mu_prev = kInf;

  int iter = 0;
  for (; iter < st_.max_iter; ++iter) {
    VectorXd hrx = At_ * y + z - c * tau;
    VectorXd hry = ps_.A * x - b * tau;
    const double hrt = c.dot(x) - b.dot(y) + kappa;
    const double mu = (x.dot(z) + tau * kappa) / (deg_ + 1);

    const double pobj = c.dot(x) / tau;
    const double dobj = b.dot(y) / tau;
    const double pres = (hry.size() ? hry.lpNorm<Eigen::Infinity>() : 0.0) / tau / norm_b;
    const double dres = hrx.lpNorm<Eigen::Infinity>() / tau / norm_c;
    const double relgap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj));

    if (st_.verbose)
      std::fprintf(stderr,
                   "it %3d  pobj % .8e  dobj % .8e  gap %.2e  pres %.2e  dres %.2e  "
                   "tau %.2e  kap %.2e  mu %.2e\n",
                   iter, pobj, dobj, relgap, pres, dres, tau, kappa, mu);

    const double metric = pres + dres + relgap;
    if (metric < best_metric) {
      best_metric = metric;
      best_x = x;
      best_y = y;
      best_z = z;
      best_tau = tau;
    }

    if (pres <= st_.tol && dres <= st_.tol && relgap <= st_.tol)
      return finish(SolveStatus::Optimal, x, y, z, tau, iter);

    const double by = b.dot(y);
    if (by > 0 && (At_ * y + z).lpNorm<Eigen::Infinity>() / by <= st_.tol * norm_c)
      return finish(SolveStatus::Infeasible, x, y / by, z / by, 1.0, iter);
    const double cx = c.dot(x);
    if (cx < 0 &&
        (p_ == 0 || (ps_.A * x).lpNorm<Eigen::Infinity>() / (-cx) <= st_.tol * norm_b))
      return finish(SolveStatus::Unbounded, x / (-cx), y, z, 1.0, iter);

    try {
      compute_scalings(x, z);
    } catch (const Error& err) {
      if (st_.verbose) std::fprintf(stderr, "exit: scaling failed (%s)\n", err.what());
      return finish(SolveStatus::NumericalError, best_x, best_y, best_z, best_tau, iter);
    }
    if (p_ > 0) {
      assemble_normal_matrix(Mwork_);
      if (!factorize(Mwork_)) {
        if (st_.verbose) std::fprintf(stderr, "exit: normal matrix factorization failed\n");
        return finish(SolveStatus::NumericalError, best_x, best_y, best_z, best_tau, iter);
      }
    }

    const VectorXd Hinv_c = apply_Hinv(c);
    VectorXd u2, v2;
    if (p_ > 0) {
      u2 = solve_normal(ps_.A * Hinv_c + b);
      v2 = apply_Hinv(At_ * u2 - c);
    } else {
      u2.resize(0);
      v2 = -Hinv_c;
    }

    auto newton_once = [&](const VectorXd& r1, const VectorXd& r2, double r3,
                           const VectorXd& ds, double dtk, VectorXd& dx, VectorXd& dy,
                           VectorXd& dz, double& dtau, double& dkap) {
      VectorXd r1h = r1 - apply_Winv(lam_jordan_inv(ds));
      VectorXd u1, v1;
      if (p_ > 0) {
        u1 = solve_normal(r2 + ps_.A * apply_Hinv(r1h));
        v1 = apply_Hinv(At_ * u1 - r1h);
      } else {
        u1.resize(0);
        v1 = -apply_Hinv(r1h);
      }
      const double den = c.dot(v2) - (p_ > 0 ? b.dot(u2) : 0.0) - kappa / tau;
      const double num = r3 - c.dot(v1) + (p_ > 0 ? b.dot(u1) : 0.0) - dtk / tau;
      dtau = num / den;
      dx = v1 + dtau * v2;
      if (p_ > 0)
        dy = u1 + dtau * u2;
      else
        dy = VectorXd::Zero(0);
      dz = r1 - At_ * dy + c * dtau;
      dkap = (dtk - kappa * dtau) / tau;
    };

    // one round of refinement against the full linearized system keeps the
    // directions accurate once mu is tiny and the scaling ill-conditioned
    auto newton = [&](const VectorXd& r1, const VectorXd& r2, double r3, const VectorXd& ds,
                      double dtk, VectorXd& dx, VectorXd& dy, VectorXd& dz, double& dtau,
                      double& dkap) {
      newton_once(r1, r2, r3, ds, dtk, dx, dy, dz, dtau, dkap);
      for (int round = 0; round < 2; ++round) {
        VectorXd e1 = r1 - (At_ * dy + dz - c * dtau);
        VectorXd e2 = r2 - (ps_.A * dx - b * dtau);
        const double e3 = r3 - (c.dot(dx) - b.dot(dy) + dkap);
        VectorXd e4 = ds - lam_jordan(apply_Winv_t(dx) + apply_W(dz));
        const double e5 = dtk - (kappa * dtau + tau * dkap);
        const double err = std::max({e1.lpNorm<Eigen::Infinity>(),
                                     e2.size() ? e2.lpNorm<Eigen::Infinity>() : 0.0,
                                     std::abs(e3), e4.lpNorm<Eigen::Infinity>(),
                                     std::abs(e5)});
        const double scale = 1.0 + std::max({r1.lpNorm<Eigen::Infinity>(),
                                             r2.size() ? r2.lpNorm<Eigen::Infinity>() : 0.0,
                                             std::abs(r3)});
        if (err <= 1e-13 * scale) break;
        VectorXd cx, cy, cz;
        double ct, ck;
        newton_once(e1, e2, e3, e4, e5, cx, cy, cz, ct, ck);
        dx += cx;
        dy += cy;
        dz += cz;
        dtau += ct;
        dkap += ck;
      }
    };

    // predictor
    VectorXd ls = lam_sq();
    VectorXd dxa, dya, dza;
    double dtaua, dkapa;
    newton(-hrx, -hry, -hrt, -ls, -tau * kappa, dxa, dya, dza, dtaua, dkapa);

    double alpha_a = std::min({step_to_boundary(x, dxa), step_to_boundary(z, dza),
                               dtaua < 0 ? -tau / dtaua : kInf,
                               dkapa < 0 ? -kappa / dkapa : kInf});
    alpha_a = std::min(1.0, alpha_a);
    const double mu_aff =
        ((x + alpha_a * dxa).dot(z + alpha_a * dza) +
         (tau + alpha_a * dtaua) * (kappa + alpha_a * dkapa)) /
        (deg_ + 1);
    double sigma = std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3.0);

    // corrector
    VectorXd corr = jordan(apply_Winv_t(dxa), apply_W(dza));
    VectorXd ds = -ls - corr + sigma * mu * e;
    const double dtk = -tau * kappa - dtaua * dkapa + sigma * mu;
    const double rs = 1.0 - sigma;
    VectorXd dx, dy, dz;
    double dtau, dkap;
    newton(-rs * hrx, -rs * hry, -rs * hrt, ds, dtk, dx, dy, dz, dtau, dkap);

    double alpha = std::min({step_to_boundary(x, dx), step_to_boundary(z, dz),
                             dtau < 0 ? -tau / dtau : kInf, dkap < 0 ? -kappa / dkap : kInf});
    alpha = std::min(1.0, 0.99 * alpha);
    if (!std::isfinite(alpha) || alpha <= 1e-13) {
      if (st_.verbose) std::fprintf(stderr, "exit: vanishing step (alpha %.2e)\n", alpha);
      return finish(SolveStatus::NumericalError, best_x, best_y, best_z, best_tau, iter);
    }
    stalled = mu > 0.98 * mu_prev ? stalled + 1 : 0;
    mu_prev = mu;
    if (stalled >= st_.stall_limit) {
      if (st_.verbose) std::fprintf(stderr, "exit: no centrality progress\n");
      return finish(SolveStatus::NumericalError, best_x, best_y, best_z, best_tau, iter);
    }

    // rounding can push the eigenvalue-limited step just past the boundary;
    // back the step off until both iterates verify as interior
    bool stepped = false;
    for (int back = 0; back < 10 && !stepped; ++back) {
      VectorXd xn = x + alpha * dx;
      VectorXd zn = z + alpha * dz;
      const double tn = tau + alpha * dtau;
      const double kn = kappa + alpha * dkap;
      if (tn > 0 && kn > 0 && cone_interior(xn) && cone_interior(zn)) {
        x = std::move(xn);
        z = std::move(zn);
        y += alpha * dy;
        tau = tn;
        kappa = kn;
        stepped = true;
      } else {
        alpha *= 0.5;
      }
    }
    if (!stepped) {
      if (st_.verbose) std::fprintf(stderr, "exit: could not stay in the cone\n");
      return finish(SolveStatus::NumericalError, best_x, best_y, best_z, best_tau, iter);
    }
  }
  return finish(SolveStatus::MaxIter, best_x, best_y, best_z, best_tau, iter);
}

}  // namespace

ConicSolution solve(const StandardForm& prob, const SolverSettings& settings) {
  PresolvedProblem ps = presolve(prob);
  if (ps.decided) {
    ConicSolution out;
    out.status = ps.early_status;
    out.primal = VectorXd::Zero(prob.c.size());
    out.dual = VectorXd::Zero(prob.b.size());
    out.cone_dual = VectorXd::Zero(prob.c.size());
    return out;
  }
  Ipm ipm(ps, settings);
  return ipm.run();
}

}  // namespace oscillopf
