#include "oscillopf/sdp_builder.hpp"

#include <Eigen/LU>
#include <cmath>
#include <cstdlib>
#include <map>

namespace oscillopf {

namespace {
constexpr double kSqrt2 = 1.4142135623730950488;
constexpr double kCoeffDrop = 1e-14;
constexpr double kReactiveCostFloor = 0.02;
}

void TradeoffConfig::validate() const {
  if (!(mu >= 0.0 && mu <= 1.0)) throw Error("mu must lie in [0, 1]");
  if (band.mode == BandSpec::Mode::Count && band.k < 1)
    throw Error("band size K must be at least 1");
}

LinExpr trace_form_expr(const ConeProgram& prog, int block_id, const MatrixXcd& C) {
  const VarBlock& blk = prog.block(block_id);
  MatrixXd E = hermitian_embed(C);
  if (2 * C.rows() != blk.dim) throw Error("trace_form_expr: dimension mismatch");
  VectorXd coeffs = svec(E);
  LinExpr expr;
  for (int a = 0; a < coeffs.size(); ++a)
    if (std::abs(coeffs[a]) > kCoeffDrop) expr.add(blk.offset + a, 0.5 * coeffs[a]);
  return expr;
}

MatrixXd lemma1_projector(const VectorXd& inertias) {
  VectorXd u1 = inertias.cwiseSqrt();
  u1 /= u1.norm();
  const int s = static_cast<int>(inertias.size());
  return MatrixXd::Identity(s, s) - u1 * u1.transpose();
}

void build_lemma1_block(ConeProgram& prog, const SymExpr& l_m_expr,
                        const MatrixXd& w_projector, int k, double gamma,
                        double weight, double balance) {
  const int s = l_m_expr.dim;
  if (k >= s) throw Error("band size K must be smaller than the system size S");
  if (!(gamma > 0)) throw Error("gamma must be positive");
  if (!(balance > 0)) throw Error("balance scale must be positive");

  const int z_id = prog.add_sym_block("Z", s);
  prog.mark_block_psd(z_id);
  const int s_id = prog.add_scalar_block("s");

  // Every feasible L_M annihilates u1 (Laplacian row sums) and W u1 = 0, so
  // the block matrix is singular along [0; u1] for every feasible point and
  // the cone constraint has no interior. Adding u1 u1^T = I - W to the lower
  // right block makes that invariant direction strictly positive without
  // changing the constraint on (Z, s, L_M).
  SymExpr lmi(2 * s);
  for (int j = 0; j < s; ++j) {
    for (int i = j; i < s; ++i) {
      LinExpr& tl = lmi.at(i, j);
      LinTerm z_t = prog.entry_term(z_id, i, j);
      tl.add(z_t.col, balance * z_t.coeff);
      if (i == j) tl.add(prog.coord(s_id), balance);
      LinExpr& br = lmi.at(s + i, s + j);
      br.add_scaled(l_m_expr.at(i, j), 1.0 / balance);
      br.constant += (i == j ? 1.0 : 0.0) - w_projector(i, j);
    }
  }
  for (int i = 0; i < s; ++i)
    for (int j = 0; j < s; ++j) lmi.at(s + i, j).constant = w_projector(i, j);
  prog.add_psd(std::move(lmi));

  const double scale = weight / (2.0 * gamma);
  for (int i = 0; i < s; ++i) prog.add_objective_term(prog.entry_term(z_id, i, i).col, scale);
  prog.add_objective_term(prog.coord(s_id), scale * k);
}

ConeProgram make_lemma1_program(const MatrixXd& l_m, const VectorXd& inertias,
                                int k, double gamma) {
  const int s = static_cast<int>(l_m.rows());
  ConeProgram prog;
  SymExpr l_expr(s);
  for (int j = 0; j < s; ++j)
    for (int i = j; i < s; ++i) l_expr.at(i, j).constant = 0.5 * (l_m(i, j) + l_m(j, i));
  build_lemma1_block(prog, l_expr, lemma1_projector(inertias), k, gamma, 1.0);
  return prog;
}

OpfModel build_opf_sdp(const RawCase& c, const KronModel& kron,
                       const QuadraticForms& forms, const DynamicParams& dyn,
                       const TradeoffConfig& cfg) {
  cfg.validate();
  if (cfg.band.mode != BandSpec::Mode::Count)
    throw Error("the OPF objective needs a fixed band size; use count mode");
  c.validate();

  const int n = static_cast<int>(c.buses.size());
  const int s = static_cast<int>(kron.sync_buses.size());
  const int k = cfg.band.k;
  const double gamma = cfg.gamma > 0 ? cfg.gamma : dyn.gamma;
  const double base = c.base_mva;

  OpfModel model;
  model.base_mva = base;
  model.gamma = gamma;
  model.band_k = k;
  for (const Bus& b : c.buses) model.bus_order.push_back(b.id);
  model.sync_buses = kron.sync_buses;

  ConeProgram& prog = model.prog;
  const int v_id = prog.add_sym_block("V_real", 2 * n);
  prog.mark_block_psd(v_id);
  const int e_id = prog.add_sym_block("E_real", 2 * s);
  const int l_id = prog.add_sym_block("L", s);

  // Lemma-1 block sits between L and the dispatch vectors so that the block
  // order matches V_real, E_real, L, Z, s, p_g, q_g.
  const VectorXd inertias = inertia_vector(kron, dyn);
  {
    SymExpr l_m_expr(s);
    for (int j = 0; j < s; ++j)
      for (int i = j; i < s; ++i) {
        LinTerm t = prog.entry_term(l_id, i, j);
        l_m_expr.at(i, j).add(t.col, t.coeff / std::sqrt(inertias[i] * inertias[j]));
      }
    // balance the LMI around the spectrum of a flat-voltage Laplacian
    double balance = 1.0;
    {
      MatrixXd l_flat = laplacian_from_lifted(MatrixXcd::Ones(s, s), kron);
      SwingSpectrum sp = spectrum(l_flat, inertias);
      const double lo = sp.eigvals[1], hi = sp.eigvals[s - 1];
      if (lo > 0 && hi > 0) balance = std::sqrt(lo * hi);
    }
    build_lemma1_block(prog, l_m_expr, lemma1_projector(inertias), k, gamma, cfg.mu,
                       balance);
  }
  const int pg_id = prog.add_vector_block("p_g", s);
  const int qg_id = prog.add_vector_block("q_g", s);

  std::map<int, int> sync_pos;  // bus id -> kron index
  for (int a = 0; a < s; ++a) sync_pos[kron.sync_buses[a]] = a;

  // (a) generation limits, (b) nodal balances at synchronous buses
  std::map<int, std::pair<double, double>> cost_of;
  for (const GenCost& gc : c.costs) cost_of[gc.bus] = {gc.c_p, gc.c_q};

  for (int a = 0; a < s; ++a) {
    const int bus_id = kron.sync_buses[a];
    const Bus& bus = c.buses[c.bus_index(bus_id)];
    const int bus_pos = c.bus_index(bus_id);

    LinExpr bal_p = trace_form_expr(prog, v_id, forms.M_p[bus_pos]);
    bal_p.add(prog.coord(pg_id, a), -1.0);
    bal_p.constant += bus.p_load / base;
    prog.add_equality(std::move(bal_p));

    LinExpr bal_q = trace_form_expr(prog, v_id, forms.M_q[bus_pos]);
    bal_q.add(prog.coord(qg_id, a), -1.0);
    bal_q.constant += bus.q_load / base;
    prog.add_equality(std::move(bal_q));

    double p_min = 0, p_max = 0, q_min = 0, q_max = 0;
    bool any = false;
    for (const Generator& g : c.gens) {
      if (!g.status || g.bus != bus_id) continue;
      any = true;
      p_min += g.p_min / base;
      p_max += g.p_max / base;
      q_min += g.q_min / base;
      q_max += g.q_max / base;
    }
    if (p_min > p_max || q_min > q_max)
      throw Error("infeasible generation box at bus " + std::to_string(bus_id));

    auto box = [&](int block, double lo, double hi) {
      if (!any || lo == hi) {
        LinExpr fix;
        fix.add(prog.coord(block, a), 1.0).constant = -lo;
        prog.add_equality(std::move(fix));
        return;
      }
      LinExpr ge;
      ge.add(prog.coord(block, a), 1.0).constant = -lo;
      prog.add_nonneg(std::move(ge));
      LinExpr le;
      le.add(prog.coord(block, a), -1.0).constant = hi;
      prog.add_nonneg(std::move(le));
    };
    box(pg_id, p_min, p_max);
    box(qg_id, q_min, q_max);

    if (any) {
      auto it = cost_of.find(bus_id);
      const double cp = it != cost_of.end() ? it->second.first : 1.0;
      const double cq = it != cost_of.end() ? it->second.second : 0.1;
      prog.add_objective_term(prog.coord(pg_id, a), (1.0 - cfg.mu) * cp);
      // the reactive cost is what renders the relaxation exact; keep a small
      // floor on its weight so the tie-breaking survives all the way to mu = 1
      const double qw = std::max(1.0 - cfg.mu, kReactiveCostFloor);
      prog.add_objective_term(prog.coord(qg_id, a), qw * cq);
    }
  }

  // (c) voltage windows everywhere, current caps on rated branches
  for (int pos = 0; pos < n; ++pos) {
    const Bus& bus = c.buses[pos];
    LinExpr vexpr = trace_form_expr(prog, v_id, forms.M_v[pos]);
    LinExpr ge = vexpr;
    ge.constant -= bus.v_min * bus.v_min;
    prog.add_nonneg(std::move(ge));
    LinExpr le;
    le.add_scaled(vexpr, -1.0);
    le.constant += bus.v_max * bus.v_max;
    prog.add_nonneg(std::move(le));
  }
  for (const auto& [branch_idx, form] : forms.M_i) {
    const Branch& br = c.branches[branch_idx];
    if (br.rate <= 0) continue;  // unlimited
    const double cap = (br.rate / base) * (br.rate / base);
    LinExpr le;
    le.add_scaled(trace_form_expr(prog, v_id, form), -1.0);
    le.constant += cap;
    prog.add_nonneg(std::move(le));
  }

  // (d) zero injections
  for (int bus_id : c.zero_injection_buses()) {
    const int pos = c.bus_index(bus_id);
    prog.add_equality(trace_form_expr(prog, v_id, forms.M_p[pos]));
    prog.add_equality(trace_form_expr(prog, v_id, forms.M_q[pos]));
  }

  // (e) Kron coupling V_SS = (Gamma Y_S) E (Gamma Y_S)^H, emitted in the
  // inverted form E = B V_SS B^H with B = (Gamma Y_S)^{-1}; the two row sets
  // describe the same affine subspace and the inverted one keeps presolve
  // pivots sparse.
  {
    MatrixXcd coupling = kron.coupling();
    Eigen::PartialPivLU<MatrixXcd> lu(coupling);
    MatrixXcd Binv_c = lu.solve(MatrixXcd::Identity(s, s));
    if (!Binv_c.allFinite()) throw Error("coupling matrix is singular");
    MatrixXd B = complex_embed(Binv_c);

    std::vector<int> embmap(2 * s);
    for (int p = 0; p < s; ++p) {
      const int pos = c.bus_index(kron.sync_buses[p]);
      embmap[p] = pos;
      embmap[s + p] = n + pos;
    }
    const VarBlock& vblk = prog.block(v_id);
    const VarBlock& eblk = prog.block(e_id);

    for (int bcol = 0; bcol < 2 * s; ++bcol) {
      for (int arow = bcol; arow < 2 * s; ++arow) {
        const double sab = arow == bcol ? 1.0 : kSqrt2;
        LinExpr row;
        row.add(eblk.offset + svec_index(2 * s, arow, bcol), 1.0);
        for (int p = 0; p < 2 * s; ++p) {
          for (int q = 0; q <= p; ++q) {
            double coeff = p == q ? B(arow, p) * B(bcol, p)
                                  : B(arow, p) * B(bcol, q) + B(arow, q) * B(bcol, p);
            if (coeff == 0.0) continue;
            const double spq = p == q ? 1.0 : kSqrt2;
            coeff *= -sab / spq;
            if (std::abs(coeff) <= kCoeffDrop) continue;
            int gi = embmap[p], gj = embmap[q];
            if (gi < gj) std::swap(gi, gj);
            row.add(vblk.offset + svec_index(2 * n, gi, gj), coeff);
          }
        }
        prog.add_equality(std::move(row));
      }
    }
  }

  // (f) L is the image of E under the lifted Laplacian map
  for (int j = 0; j < s; ++j) {
    for (int i = j; i < s; ++i) {
      LinExpr row;
      row.add(prog.entry_term(l_id, i, j));
      if (i != j) {
        if (kron.has_edge(i, j)) {
          const double g = kron.eff_reactance(i, j);
          LinTerm t1 = prog.entry_term(e_id, i, j);
          LinTerm t2 = prog.entry_term(e_id, s + i, s + j);
          row.add(t1.col, 0.5 * t1.coeff / g);
          row.add(t2.col, 0.5 * t2.coeff / g);
        }
      } else {
        for (int kk = 0; kk < s; ++kk) {
          if (kk == i || !kron.has_edge(i, kk)) continue;
          const double g = kron.eff_reactance(i, kk);
          LinTerm t1 = prog.entry_term(e_id, std::max(i, kk), std::min(i, kk));
          LinTerm t2 = prog.entry_term(e_id, s + std::max(i, kk), s + std::min(i, kk));
          row.add(t1.col, -0.5 * t1.coeff / g);
          row.add(t2.col, -0.5 * t2.coeff / g);
        }
      }
      prog.add_equality(std::move(row));
    }
  }

  return model;
}

}  // namespace oscillopf
