#include <algorithm>
#include <cmath>
#include <map>

#include "oscillopf/case.hpp"
#include "oscillopf/conic_solver.hpp"

namespace oscillopf {

namespace {

struct WorkRow {
  std::vector<LinTerm> terms;  // sorted by col
  double b = 0.0;
  bool alive = true;
};

double coeff_of(const WorkRow& row, int col) {
  auto it = std::lower_bound(row.terms.begin(), row.terms.end(), col,
                             [](const LinTerm& t, int c) { return t.col < c; });
  return (it != row.terms.end() && it->col == col) ? it->coeff : 0.0;
}

bool contains(const WorkRow& row, int col) { return coeff_of(row, col) != 0.0; }

// target -= f * pivot, with column `skip` removed exactly.
void axpy_row(WorkRow& target, const WorkRow& pivot, double f, int skip,
              std::vector<int>* fill_cols) {
  std::vector<LinTerm> out;
  out.reserve(target.terms.size() + pivot.terms.size());
  size_t a = 0, b = 0;
  double scale = 0.0;
  for (const LinTerm& t : target.terms) scale = std::max(scale, std::abs(t.coeff));
  for (const LinTerm& t : pivot.terms) scale = std::max(scale, std::abs(f * t.coeff));
  const double drop = 1e-14 * std::max(1.0, scale);
  while (a < target.terms.size() || b < pivot.terms.size()) {
    int ca = a < target.terms.size() ? target.terms[a].col : INT32_MAX;
    int cb = b < pivot.terms.size() ? pivot.terms[b].col : INT32_MAX;
    int col = std::min(ca, cb);
    double v = 0.0;
    bool was_in_target = false;
    if (ca == col) {
      v += target.terms[a].coeff;
      was_in_target = true;
      ++a;
    }
    if (cb == col) {
      v -= f * pivot.terms[b].coeff;
      ++b;
    }
    if (col == skip) continue;
    if (std::abs(v) <= drop) continue;
    if (!was_in_target && fill_cols) fill_cols->push_back(col);
    out.push_back({col, v});
  }
  target.terms.swap(out);
  target.b -= f * pivot.b;
}

}  // namespace

PresolvedProblem presolve(const StandardForm& prob) {
  PresolvedProblem ps;
  const int n = static_cast<int>(prob.c.size());
  const int p = static_cast<int>(prob.b.size());
  ps.orig_cols = n;
  ps.orig_rows = p;
  ps.c_orig = prob.c;
  ps.obj_constant = prob.obj_constant;
  ps.dup_of.assign(p, -1);
  ps.row_scale.assign(p, 1.0);

  std::vector<bool> is_free(n, false);
  {
    int off = 0;
    for (const ConeSpec& cs : prob.cones) {
      for (int k = 0; k < cs.coords(); ++k) is_free[off + k] = cs.type == ConeType::Free;
      off += cs.coords();
    }
    if (off != n) throw Error("cone list does not cover the decision vector");
  }

  // Normalized working rows.
  std::vector<WorkRow> rows(p);
  {
    Eigen::SparseMatrix<double, Eigen::RowMajor> Ar(prob.A);
    for (int r = 0; r < p; ++r) {
      WorkRow& row = rows[r];
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(Ar, r); it; ++it)
        if (it.value() != 0.0) row.terms.push_back({static_cast<int>(it.col()), it.value()});
      std::sort(row.terms.begin(), row.terms.end(),
                [](const LinTerm& x, const LinTerm& y) { return x.col < y.col; });
      row.b = prob.b[r];
      double mx = 0.0;
      for (const LinTerm& t : row.terms) mx = std::max(mx, std::abs(t.coeff));
      if (mx > 0.0) {
        double s = 1.0 / mx;
        if (row.terms.front().coeff < 0) s = -s;
        for (LinTerm& t : row.terms) t.coeff *= s;
        row.b *= s;
        ps.row_scale[r] = s;
      }
    }
  }

  // Drop empty and duplicate rows.
  std::map<std::vector<int>, std::vector<int>> by_pattern;
  for (int r = 0; r < p; ++r) {
    WorkRow& row = rows[r];
    if (row.terms.empty()) {
      if (std::abs(row.b) > 1e-9) {
        ps.decided = true;
        ps.early_status = SolveStatus::Infeasible;
        return ps;
      }
      row.alive = false;
      ps.dup_of[r] = r;
      continue;
    }
    std::vector<int> pattern;
    for (const LinTerm& t : row.terms) pattern.push_back(t.col);
    auto& bucket = by_pattern[pattern];
    for (int other : bucket) {
      const WorkRow& orow = rows[other];
      bool same = true;
      for (size_t k = 0; k < row.terms.size() && same; ++k)
        same = std::abs(row.terms[k].coeff - orow.terms[k].coeff) <= 1e-12;
      if (!same) continue;
      if (std::abs(row.b - orow.b) > 1e-9 * (1.0 + std::abs(orow.b))) {
        ps.decided = true;
        ps.early_status = SolveStatus::Infeasible;
        return ps;
      }
      row.alive = false;
      ps.dup_of[r] = other;
      break;
    }
    if (row.alive) bucket.push_back(r);
  }

  // Column -> candidate rows (lazily maintained under fill).
  std::vector<std::vector<int>> col_rows(n);
  for (int r = 0; r < p; ++r)
    if (rows[r].alive)
      for (const LinTerm& t : rows[r].terms) col_rows[t.col].push_back(r);

  std::vector<bool> eliminated(n, false);
  std::vector<int> free_cols;
  for (int j = 0; j < n; ++j)
    if (is_free[j]) free_cols.push_back(j);

  auto best_pivot = [&](int j) -> std::pair<int, int> {  // (row, nnz) or (-1, _)
    double maxc = 0.0;
    for (int r : col_rows[j])
      if (rows[r].alive) maxc = std::max(maxc, std::abs(coeff_of(rows[r], j)));
    if (maxc <= 1e-12) return {-1, 0};
    int best_row = -1, best_nnz = INT32_MAX;
    for (int r : col_rows[j]) {
      if (!rows[r].alive) continue;
      const double cj = std::abs(coeff_of(rows[r], j));
      if (cj < 0.1 * maxc || cj <= 1e-12) continue;
      const int nnz = static_cast<int>(rows[r].terms.size());
      if (nnz < best_nnz) {
        best_nnz = nnz;
        best_row = r;
      }
    }
    return {best_row, best_nnz};
  };

  auto eliminate = [&](int j, int prow) {
    WorkRow& pivot = rows[prow];
    const double piv = coeff_of(pivot, j);
    std::vector<int> affected = col_rows[j];
    for (int r : affected) {
      if (r == prow || !rows[r].alive) continue;
      const double cj = coeff_of(rows[r], j);
      if (cj == 0.0) continue;
      const double f = cj / piv;
      std::vector<int> fills;
      axpy_row(rows[r], pivot, f, j, &fills);
      for (int col : fills) col_rows[col].push_back(r);
      ps.updates.push_back({prow, r, f});
      if (rows[r].terms.empty()) {
        if (std::abs(rows[r].b) > 1e-9) {
          ps.decided = true;
          ps.early_status = SolveStatus::Infeasible;
        }
        rows[r].alive = false;
        if (ps.dup_of[r] < 0) ps.dup_of[r] = r;
      }
    }
    PresolvedProblem::PivotRecord rec;
    rec.col = j;
    rec.pivot = piv;
    rec.rhs = pivot.b;
    rec.orig_row = prow;
    for (const LinTerm& t : pivot.terms)
      if (t.col != j) rec.row.push_back(t);
    ps.stack.push_back(std::move(rec));
    pivot.alive = false;
    eliminated[j] = true;
  };

  // Cheapest pivots first; thresholds grow until only dense pivots remain.
  const int thresholds[] = {2, 3, 4, 6, 10, 20, 60, 200, INT32_MAX};
  for (int t : thresholds) {
    bool changed = true;
    while (changed) {
      changed = false;
      for (int j : free_cols) {
        if (eliminated[j] || ps.decided) continue;
        auto [r, nnz] = best_pivot(j);
        if (r >= 0 && nnz <= t) {
          eliminate(j, r);
          changed = true;
        }
      }
    }
    if (ps.decided) return ps;
  }

  // Fold eliminated columns out of the objective.
  VectorXd c_work = prob.c;
  for (const auto& rec : ps.stack) {
    const double cj = c_work[rec.col];
    if (cj == 0.0) continue;
    const double scale = cj / rec.pivot;
    for (const LinTerm& t : rec.row) c_work[t.col] -= scale * t.coeff;
    ps.obj_constant += scale * rec.rhs;
    c_work[rec.col] = 0.0;
  }

  // Columns of the reduced problem: cone coordinates in order, then a
  // plus/minus pair for every free coordinate that resisted elimination.
  std::vector<int> col_map(n, -1);
  int nred = 0;
  for (int j = 0; j < n; ++j)
    if (!is_free[j]) col_map[j] = nred++;
  for (int j : free_cols)
    if (!eliminated[j]) {
      ps.split_cols.push_back({nred, nred + 1});
      col_map[j] = -2 - static_cast<int>(ps.split_cols.size() - 1);
      nred += 2;
    }

  {
    int off = 0;
    for (const ConeSpec& cs : prob.cones) {
      if (cs.type != ConeType::Free) ps.cones.push_back(cs);
      off += cs.coords();
    }
    if (!ps.split_cols.empty())
      ps.cones.push_back({ConeType::NonNeg, 2 * static_cast<int>(ps.split_cols.size())});
  }
  for (int j = 0; j < n; ++j)
    if (!is_free[j]) ps.kept_cols.push_back(j);
  for (int j : free_cols)
    if (!eliminated[j]) ps.kept_cols.push_back(j);  // split source, in order

  std::vector<Eigen::Triplet<double>> trips;
  std::vector<double> rhs;
  for (int r = 0; r < p; ++r) {
    if (!rows[r].alive) continue;
    const int rr = static_cast<int>(rhs.size());
    ps.kept_rows.push_back(r);
    for (const LinTerm& t : rows[r].terms) {
      const int m = col_map[t.col];
      if (m >= 0) {
        trips.emplace_back(rr, m, t.coeff);
      } else {
        const auto& pm = ps.split_cols[static_cast<size_t>(-2 - m)];
        trips.emplace_back(rr, pm.first, t.coeff);
        trips.emplace_back(rr, pm.second, -t.coeff);
      }
    }
    rhs.push_back(rows[r].b);
  }
  ps.A.resize(static_cast<int>(rhs.size()), nred);
  ps.A.setFromTriplets(trips.begin(), trips.end());
  ps.b = Eigen::Map<const VectorXd>(rhs.data(), static_cast<long>(rhs.size()));

  ps.c = VectorXd::Zero(nred);
  for (int j = 0; j < n; ++j) {
    const int m = col_map[j];
    if (m >= 0) {
      ps.c[m] = c_work[j];
    } else if (m <= -2) {
      const auto& pm = ps.split_cols[static_cast<size_t>(-2 - m)];
      ps.c[pm.first] = c_work[j];
      ps.c[pm.second] = -c_work[j];
    }
  }
  return ps;
}

VectorXd PresolvedProblem::expand_primal(const VectorXd& x_reduced) const {
  VectorXd x = VectorXd::Zero(orig_cols);
  // cone coordinates first
  size_t idx = 0;
  for (; idx < kept_cols.size() - split_cols.size(); ++idx)
    x[kept_cols[idx]] = x_reduced[static_cast<int>(idx)];
  // split sources
  for (size_t s = 0; s < split_cols.size(); ++s) {
    const int j = kept_cols[idx + s];
    x[j] = x_reduced[split_cols[s].first] - x_reduced[split_cols[s].second];
  }
  // eliminated coordinates, most recent first
  for (auto it = stack.rbegin(); it != stack.rend(); ++it) {
    double v = it->rhs;
    for (const LinTerm& t : it->row) v -= t.coeff * x[t.col];
    x[it->col] = v / it->pivot;
  }
  return x;
}

VectorXd PresolvedProblem::recover_duals(const VectorXd& y_reduced) const {
  VectorXd y = VectorXd::Zero(orig_rows);
  for (size_t k = 0; k < kept_rows.size(); ++k) y[kept_rows[k]] = y_reduced[static_cast<int>(k)];

  // Pivot-row multipliers from dual feasibility on eliminated columns,
  // which appear only in earlier pivot rows after elimination.
  for (size_t k = 0; k < stack.size(); ++k) {
    const auto& rec = stack[k];
    double acc = c_orig[rec.col];
    for (size_t l = 0; l < k; ++l) {
      const auto& prev = stack[l];
      auto it = std::lower_bound(prev.row.begin(), prev.row.end(), rec.col,
                                 [](const LinTerm& t, int c) { return t.col < c; });
      if (it != prev.row.end() && it->col == rec.col) acc -= it->coeff * y[prev.orig_row];
    }
    y[rec.orig_row] = acc / rec.pivot;
  }

  // Undo the recorded row operations (transposed, in reverse).
  for (auto it = updates.rbegin(); it != updates.rend(); ++it)
    y[it->pivot_row] -= it->factor * y[it->target_row];

  // Back to the caller's row scaling.
  for (int r = 0; r < orig_rows; ++r) y[r] *= row_scale[r];
  return y;
}

VectorXd PresolvedProblem::expand_cone_dual(const VectorXd& z_reduced) const {
  VectorXd z = VectorXd::Zero(orig_cols);
  const size_t ncone = kept_cols.size() - split_cols.size();
  for (size_t idx = 0; idx < ncone; ++idx) z[kept_cols[idx]] = z_reduced[static_cast<int>(idx)];
  return z;
}

}  // namespace oscillopf
