#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "fixtures.hpp"
#include "oscillopf/ambient_sim.hpp"

using namespace oscillopf;

TEST_CASE("sim config validation") {
  SimConfig cfg;
  cfg.dt = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = SimConfig{};
  cfg.burn_in = cfg.horizon;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = SimConfig{};
  cfg.n_trials = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("eigensystem Monte Carlo matches the analytic variance") {
  SimConfig cfg;
  cfg.horizon = 600;
  cfg.burn_in = 60;
  cfg.n_trials = 6;
  for (auto [lam, gam] : {std::pair{1.0, 1.0}, {4.0, 0.5}, {2.0, 6.0}}) {
    VarianceEstimate est = simulate_eigensystem(lam, gam, cfg);
    const double analytic = eigenstate_variance(lam, gam);
    const double z = std::abs(est.value - analytic) / est.stderr_;
    INFO("lambda ", lam, " gamma ", gam, " est ", est.value, " analytic ", analytic,
         " z ", z);
    CHECK(z <= 3.0);
  }
}

TEST_CASE("heavily damped limit") {
  SimConfig cfg;
  cfg.horizon = 800;
  cfg.burn_in = 80;
  cfg.n_trials = 4;
  VarianceEstimate est = simulate_eigensystem(1.0, 50.0, cfg);
  const double z = std::abs(est.value - 0.01) / est.stderr_;
  CHECK(z <= 3.0);
}

TEST_CASE("coarse dt is rejected with a suggestion") {
  SimConfig cfg;
  CHECK_THROWS_WITH_AS(simulate_eigensystem(100.0, 0.1, cfg), doctest::Contains("dt"),
                       Error);
}

TEST_CASE("swing simulation is shift invariant without noise") {
  MatrixXd L(3, 3);
  L << 2, -1, -1, -1, 2, -1, -1, -1, 2;
  VectorXd m = VectorXd::Ones(3), d = VectorXd::Constant(3, 0.3);
  SimConfig cfg;
  cfg.horizon = 5;
  cfg.burn_in = 1;
  cfg.n_trials = 1;
  cfg.traj_stride = 100;
  const VectorXd shift = VectorXd::Constant(3, 0.7);
  SwingSimResult res =
      simulate_swing(L, m, d, BandSpec::count(2), cfg, shift, /*noise_scale=*/0.0);
  // a uniform angle offset is an equilibrium: band projections stay zero
  CHECK(res.band_energy.value < 1e-20);
  for (const VectorXd& y : res.traj_y) CHECK(y.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("two-node swing energy matches the analytic mode variance") {
  MatrixXd L(2, 2);
  L << 1.5, -1.5, -1.5, 1.5;
  VectorXd m(2), d(2);
  m << 1.0, 2.0;
  const double gamma = 0.4;
  d = gamma * m;
  SimConfig cfg;
  cfg.horizon = 800;
  cfg.burn_in = 80;
  cfg.n_trials = 6;
  SwingSimResult res = simulate_swing(L, m, d, BandSpec::count(1), cfg);
  // single nonzero mode: lambda = 1.5/1 + 1.5/2
  const double lam = 1.5 * (1.0 / 1.0 + 1.0 / 2.0);
  const double analytic = eigenstate_variance(lam, gamma);
  const double z = std::abs(res.band_energy.value - analytic) / res.band_energy.stderr_;
  INFO("estimate ", res.band_energy.value, " analytic ", analytic, " z ", z);
  CHECK(z <= 3.0);
}

TEST_CASE("five-node MIMO projections decouple into eigensystem variances") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> w(0.5, 2.0), mm(0.5, 2.0);
  MatrixXd L = MatrixXd::Zero(5, 5);
  auto add_edge = [&](int i, int j) {
    double wij = w(rng);
    L(i, j) -= wij;
    L(j, i) -= wij;
    L(i, i) += wij;
    L(j, j) += wij;
  };
  for (int i = 1; i < 5; ++i) add_edge(i - 1, i);
  add_edge(0, 4);
  add_edge(1, 3);
  VectorXd m(5);
  for (int i = 0; i < 5; ++i) m[i] = mm(rng);
  const double gamma = 0.5;
  VectorXd d = gamma * m;

  SimConfig cfg;
  cfg.horizon = 700;
  cfg.burn_in = 70;
  cfg.n_trials = 6;
  SwingSimResult res = simulate_swing(L, m, d, BandSpec::count(4), cfg);
  SwingSpectrum sp = spectrum(L, m);
  REQUIRE(res.per_mode.size() == 4);
  for (size_t bi = 0; bi < res.band.size(); ++bi) {
    const double lam = sp.eigvals[res.band[bi]];
    const double analytic = eigenstate_variance(lam, gamma);
    const double z =
        std::abs(res.per_mode[bi].value - analytic) / res.per_mode[bi].stderr_;
    INFO("mode ", res.band[bi], " lambda ", lam, " z ", z);
    CHECK(z <= 3.0);
  }
}

TEST_CASE("longer horizons shrink the stderr roughly like sqrt") {
  MatrixXd L(2, 2);
  L << 2, -2, -2, 2;
  VectorXd m = VectorXd::Ones(2);
  VectorXd d = VectorXd::Constant(2, 0.5);
  double short_err = 0, long_err = 0;
  for (unsigned seed : {1u, 2u, 3u}) {
    SimConfig cfg;
    cfg.n_trials = 4;
    cfg.seed = seed;
    cfg.horizon = 300;
    cfg.burn_in = 30;
    short_err += simulate_swing(L, m, d, BandSpec::count(1), cfg).band_energy.stderr_;
    cfg.horizon = 600;
    long_err += simulate_swing(L, m, d, BandSpec::count(1), cfg).band_energy.stderr_;
  }
  const double ratio = short_err / long_err;
  CHECK(ratio > std::sqrt(2.0) / 1.5);
  CHECK(ratio < std::sqrt(2.0) * 1.5);
}

TEST_CASE("zero mode is a random walk and stays excluded") {
  // direct scalar oracle for the marginally stable mode: y'' = x
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double dt = 1e-3;
  auto var_at = [&](double horizon) {
    double y = 0, w = 0, acc = 0;
    long n = 0;
    std::mt19937_64 r2(42);
    for (double t = 0; t < horizon; t += dt) {
      w += std::sqrt(dt) * normal(r2);
      y += dt * w;
      acc += y * y;
      ++n;
    }
    return acc / n;
  };
  // variance grows without bound: horizon quadrupling inflates it strongly
  CHECK(var_at(80.0) > 10.0 * var_at(20.0));

  // band selection never admits the zero mode
  MatrixXd L(3, 3);
  L << 1, -1, 0, -1, 2, -1, 0, -1, 1;
  SwingSpectrum sp = spectrum(L, VectorXd::Ones(3));
  for (int k = 1; k <= 2; ++k) {
    auto band = select_band(sp, BandSpec::count(k));
    for (int idx : band) CHECK(idx != 0);
  }
}

TEST_CASE("impulse response stays real in the oscillatory branch") {
  const double gamma = 0.3, lambda = 4.0;  // 4 lambda > gamma^2
  const std::complex<double> r = std::sqrt(std::complex<double>(gamma * gamma - 4 * lambda));
  for (double t = 0.1; t < 20; t += 0.7) {
    const std::complex<double> c = 0.5 * (-gamma + r), d = 0.5 * (-gamma - r);
    const std::complex<double> h = (std::exp(c * t) - std::exp(d * t)) / r;
    CHECK(std::abs(h.imag()) < 1e-12);
  }
  CHECK(impulse_energy(lambda, gamma) ==
        doctest::Approx(1.0 / (2 * lambda * gamma)).epsilon(1e-6));
}
