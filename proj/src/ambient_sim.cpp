#include "oscillopf/ambient_sim.hpp"

#include <cmath>
#include <complex>
#include <future>
#include <random>

namespace oscillopf {

void SimConfig::validate() const {
  if (!(dt > 0)) throw Error("sim: dt must be positive");
  if (!(burn_in < horizon)) throw Error("sim: burn_in must be below horizon");
  if (n_trials < 1) throw Error("sim: need at least one trial");
}

namespace {

VarianceEstimate pool_trials(const std::vector<double>& vals) {
  VarianceEstimate est;
  const double n = static_cast<double>(vals.size());
  for (double v : vals) est.value += v;
  est.value /= n;
  if (vals.size() > 1) {
    double ss = 0;
    for (double v : vals) ss += (v - est.value) * (v - est.value);
    est.stderr_ = std::sqrt(ss / (n - 1) / n);
  }
  return est;
}

}  // namespace

VarianceEstimate simulate_eigensystem(double lambda, double gamma, const SimConfig& cfg) {
  cfg.validate();
  if (!(lambda > 0)) throw Error("sim: lambda must be positive");
  if (!(gamma > 0)) throw Error("sim: gamma must be positive");
  // explicit scheme keeps its stationary variance only well inside the
  // stability region dt < gamma/lambda
  const double dt_max = 0.25 * std::min(gamma / lambda, 1.0 / gamma);
  if (cfg.dt > dt_max)
    throw Error("sim: dt too large for lambda = " + std::to_string(lambda) +
                "; use dt <= " + std::to_string(dt_max));

  const long steps = static_cast<long>(cfg.horizon / cfg.dt);
  const long skip = static_cast<long>(cfg.burn_in / cfg.dt);
  const double sdt = std::sqrt(cfg.dt);

  std::vector<double> trial_vals(cfg.n_trials);
  for (int trial = 0; trial < cfg.n_trials; ++trial) {
    std::mt19937_64 rng(cfg.seed + static_cast<unsigned>(trial));
    std::normal_distribution<double> normal(0.0, 1.0);
    double y = 0, w = 0, acc = 0;
    long count = 0;
    for (long k = 0; k < steps; ++k) {
      const double wn = w + cfg.dt * (-gamma * w - lambda * y) + sdt * normal(rng);
      y += cfg.dt * w;
      w = wn;
      if (k >= skip) {
        acc += y * y;
        ++count;
      }
    }
    trial_vals[trial] = acc / static_cast<double>(count);
  }
  return pool_trials(trial_vals);
}

SwingSimResult simulate_swing(const MatrixXd& L, const VectorXd& inertias,
                              const VectorXd& dampings, const BandSpec& band,
                              const SimConfig& cfg, const VectorXd& delta0,
                              double noise_scale) {
  cfg.validate();
  const int s = static_cast<int>(L.rows());
  if (inertias.size() != s || dampings.size() != s)
    throw Error("sim: dimension mismatch");

  SwingSpectrum sp = spectrum(L, inertias);
  sp.band = select_band(sp, band);
  const double lam_max = sp.eigvals[s - 1];
  if (cfg.dt * cfg.dt * lam_max >= 2.0)
    throw Error("sim: dt too large for stiffest mode; use dt <= " +
                std::to_string(std::sqrt(2.0 / lam_max)));

  const int nb = static_cast<int>(sp.band.size());
  MatrixXd proj(nb, s);  // rows of U_band^T M^{1/2}
  for (int bi = 0; bi < nb; ++bi)
    proj.row(bi) =
        sp.eigvecs.col(sp.band[bi]).transpose() * inertias.cwiseSqrt().asDiagonal();

  if (delta0.size() != 0 && delta0.size() != s)
    throw Error("sim: initial state size mismatch");

  const long steps = static_cast<long>(cfg.horizon / cfg.dt);
  const long skip = static_cast<long>(cfg.burn_in / cfg.dt);
  const double sdt = noise_scale * std::sqrt(cfg.dt);
  const VectorXd m_inv = inertias.cwiseInverse();
  const VectorXd m_isqrt = inertias.cwiseSqrt().cwiseInverse();
  const VectorXd w_scale = (VectorXd::Ones(s) + cfg.dt * dampings.cwiseProduct(m_inv))
                               .cwiseInverse();

  struct TrialOut {
    double energy = 0;
    VectorXd mode_acc;
    std::vector<double> traj_t;
    std::vector<VectorXd> traj_y;
  };

  auto run_trial = [&](int trial) {
    std::mt19937_64 rng(cfg.seed + static_cast<unsigned>(trial));
    std::normal_distribution<double> normal(0.0, 1.0);
    VectorXd delta = delta0.size() ? delta0 : VectorXd::Zero(s);
    VectorXd w = VectorXd::Zero(s), xi(s);
    TrialOut out;
    out.mode_acc = VectorXd::Zero(nb);
    long count = 0;
    const bool record = cfg.traj_stride > 0 && trial == 0;
    for (long k = 0; k < steps; ++k) {
      for (int i = 0; i < s; ++i) xi[i] = normal(rng);
      w = w_scale.cwiseProduct(w - cfg.dt * m_inv.cwiseProduct(L * delta) +
                               sdt * m_isqrt.cwiseProduct(xi));
      delta += cfg.dt * w;
      if (k >= skip) {
        VectorXd y = proj * delta;
        out.energy += y.squaredNorm();
        out.mode_acc += y.cwiseProduct(y);
        ++count;
        if (record && (count % cfg.traj_stride) == 0) {
          out.traj_t.push_back(static_cast<double>(k + 1) * cfg.dt);
          out.traj_y.push_back(y);
        }
      }
    }
    out.energy /= static_cast<double>(count);
    out.mode_acc /= static_cast<double>(count);
    return out;
  };

  std::vector<std::future<TrialOut>> futs;
  for (int trial = 0; trial < cfg.n_trials; ++trial)
    futs.push_back(std::async(std::launch::async, run_trial, trial));

  std::vector<double> energies;
  std::vector<std::vector<double>> modes(nb);
  SwingSimResult res;
  res.band = sp.band;
  for (int trial = 0; trial < cfg.n_trials; ++trial) {
    TrialOut out = futs[trial].get();
    energies.push_back(out.energy);
    for (int bi = 0; bi < nb; ++bi) modes[bi].push_back(out.mode_acc[bi]);
    if (trial == 0) {
      res.traj_t = std::move(out.traj_t);
      res.traj_y = std::move(out.traj_y);
    }
  }
  res.band_energy = pool_trials(energies);
  for (int bi = 0; bi < nb; ++bi) res.per_mode.push_back(pool_trials(modes[bi]));
  return res;
}

namespace {

double h_sq(double t, double gamma, const std::complex<double>& r) {
  const std::complex<double> c = 0.5 * (-gamma + r);
  const std::complex<double> d = 0.5 * (-gamma - r);
  std::complex<double> h;
  if (std::abs(r) < 1e-12) {
    h = t * std::exp(-0.5 * gamma * t);  // critically damped limit
  } else {
    h = (std::exp(c * t) - std::exp(d * t)) / r;
  }
  return h.real() * h.real();
}

double adaptive_simpson(double a, double b, double fa, double fm, double fb, double whole,
                        double tol, int depth, double gamma,
                        const std::complex<double>& r) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = h_sq(lm, gamma, r), frm = h_sq(rm, gamma, r);
  const double left = (m - a) / 6.0 * (fa + 4 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) < 15 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson(a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, gamma, r) +
         adaptive_simpson(m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, gamma, r);
}

}  // namespace

double impulse_energy(double lambda, double gamma) {
  if (!(lambda > 0) || !(gamma > 0)) throw Error("impulse_energy: need lambda, gamma > 0");
  const std::complex<double> r = std::sqrt(std::complex<double>(gamma * gamma - 4 * lambda));
  // slowest decay rate of h(t)
  const double rate = 0.5 * (gamma - std::min(gamma, r.real()));
  const double slow = rate > 1e-12 ? rate : 0.5 * gamma;
  const double T = std::max(40.0 / slow, 10.0 / gamma);

  // split at a few envelope scales to help the recursion
  const int pieces = 8;
  double total = 0.0;
  double prev = 0.0;
  for (int k = 1; k <= pieces; ++k) {
    const double a = prev, b = T * k / pieces;
    const double fa = h_sq(a, gamma, r), fb = h_sq(b, gamma, r);
    const double fm = h_sq(0.5 * (a + b), gamma, r);
    const double whole = (b - a) / 6.0 * (fa + 4 * fm + fb);
    total += adaptive_simpson(a, b, fa, fm, fb, whole, 1e-12 / pieces, 40, gamma, r);
    prev = b;
  }
  return total;
}

}  // namespace oscillopf
