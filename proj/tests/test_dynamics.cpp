#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <random>

#include "fixtures.hpp"
#include "oscillopf/ambient_sim.hpp"
#include "oscillopf/dynamics.hpp"

using namespace oscillopf;

namespace {

KronModel toy_kron(int s, std::mt19937_64& rng, double edge_prob = 0.8) {
  // synthetic effective reactances over a connected random graph
  KronModel kron;
  for (int i = 0; i < s; ++i) kron.sync_buses.push_back(i + 1);
  kron.Gamma = MatrixXcd::Zero(s, s);
  kron.y_internal = VectorXcd::Constant(s, Complex(0, -10));
  kron.eff_reactance = MatrixXd::Zero(s, s);
  std::uniform_real_distribution<double> ur(0.1, 1.0);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  for (int i = 0; i < s; ++i)
    for (int j = i + 1; j < s; ++j) {
      const bool tree_edge = j == i + 1;
      if (tree_edge || coin(rng) < edge_prob) {
        const double g = ur(rng);
        kron.eff_reactance(i, j) = kron.eff_reactance(j, i) = g;
      }
    }
  return kron;
}

OperatingPoint random_admissible_op(int s, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> mag(0.9, 1.1);
  std::uniform_real_distribution<double> ang(-0.5, 0.5);
  OperatingPoint op;
  op.e_mag.resize(s);
  op.e_ang.resize(s);
  for (int i = 0; i < s; ++i) {
    op.e_mag[i] = mag(rng);
    op.e_ang[i] = ang(rng);
  }
  return op;
}

}  // namespace

TEST_CASE("laplacian from equal angles and unit magnitudes") {
  std::mt19937_64 rng(1);
  KronModel kron = toy_kron(4, rng);
  OperatingPoint op;
  op.e_mag = VectorXd::Ones(4);
  op.e_ang = VectorXd::Zero(4);
  LaplacianResult res = laplacian_from_angles(op, kron);
  CHECK(res.admissible);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      if (i == j || !kron.has_edge(i, j)) continue;
      CHECK(res.L(i, j) == doctest::Approx(-1.0 / kron.eff_reactance(i, j)));
    }
  CHECK((res.L * VectorXd::Ones(4)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("laplacian row sums vanish and PSD holds at admissible points") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 25; ++trial) {
    KronModel kron = toy_kron(5, rng);
    OperatingPoint op = random_admissible_op(5, rng);
    LaplacianResult res = laplacian_from_angles(op, kron);
    CHECK(res.admissible);
    CHECK((res.L * VectorXd::Ones(5)).cwiseAbs().maxCoeff() < 1e-10);
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(res.L, Eigen::EigenvaluesOnly);
    CHECK(eig.eigenvalues().minCoeff() > -1e-10);
  }
}

TEST_CASE("inadmissible spread is flagged but still returns L") {
  std::mt19937_64 rng(3);
  KronModel kron = toy_kron(3, rng, 1.0);
  OperatingPoint op;
  op.e_mag = VectorXd::Ones(3);
  op.e_ang.resize(3);
  op.e_ang << 0.0, 1.7, 0.0;  // > pi/2 spread on edge (0,1)
  LaplacianResult res = laplacian_from_angles(op, kron);
  CHECK_FALSE(res.admissible);
  CHECK(res.L.rows() == 3);
}

TEST_CASE("lifted map agrees with angles on rank-1 points and is linear") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    KronModel kron = toy_kron(6, rng);
    OperatingPoint op = random_admissible_op(6, rng);
    VectorXcd e = op.phasors();
    MatrixXcd lifted = e * e.adjoint();
    MatrixXd from_lift = laplacian_from_lifted(lifted, kron);
    MatrixXd from_ang = laplacian_from_angles(op, kron).L;
    CHECK((from_lift - from_ang).cwiseAbs().maxCoeff() < 1e-12);

    // identity lifted matrix has zero off-diagonal correlation: zero map
    MatrixXd from_id = laplacian_from_lifted(MatrixXcd::Identity(6, 6), kron);
    CHECK(from_id.cwiseAbs().maxCoeff() < 1e-14);

    // linearity
    MatrixXcd a = MatrixXcd::Random(6, 6), b = MatrixXcd::Random(6, 6);
    a = (a + a.adjoint()).eval();
    b = (b + b.adjoint()).eval();
    MatrixXd sum_map = laplacian_from_lifted(a + b, kron);
    MatrixXd map_sum = laplacian_from_lifted(a, kron) + laplacian_from_lifted(b, kron);
    CHECK((sum_map - map_sum).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("spectrum of the two-node path graph") {
  MatrixXd L(2, 2);
  L << 1, -1, -1, 1;
  SwingSpectrum sp = spectrum(L, VectorXd::Ones(2));
  CHECK(sp.eigvals[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(sp.eigvals[1] == doctest::Approx(2.0));
}

TEST_CASE("spectrum properties: orthonormality, reconstruction, first eigenvector") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 15; ++trial) {
    KronModel kron = toy_kron(7, rng);
    OperatingPoint op = random_admissible_op(7, rng);
    MatrixXd L = laplacian_from_angles(op, kron).L;
    VectorXd m(7);
    std::uniform_real_distribution<double> ur(0.2, 3.0);
    for (int i = 0; i < 7; ++i) m[i] = ur(rng);
    SwingSpectrum sp = spectrum(L, m);

    CHECK((sp.eigvecs.transpose() * sp.eigvecs - MatrixXd::Identity(7, 7))
              .cwiseAbs()
              .maxCoeff() < 1e-10);
    MatrixXd recon =
        sp.eigvecs * sp.eigvals.asDiagonal() * sp.eigvecs.transpose();
    CHECK((recon - sp.L_M).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(std::abs(sp.eigvals[0]) < 1e-9);

    // u1 parallel to M^{1/2} 1, i.e. M^{-1/2} u1 parallel to the ones vector
    VectorXd u1 = sp.eigvecs.col(0);
    VectorXd expect = m.cwiseSqrt();
    expect /= expect.norm();
    CHECK(std::min((u1 - expect).norm(), (u1 + expect).norm()) < 1e-8);
  }
}

TEST_CASE("spectrum rejects indefinite input") {
  MatrixXd L(2, 2);
  L << -1, 0, 0, 1;
  CHECK_THROWS_AS(spectrum(L, VectorXd::Ones(2)), Error);
}

TEST_CASE("band selection") {
  SwingSpectrum sp;
  sp.eigvals.resize(5);
  sp.eigvals << 0, 1, 4, 9, 16;

  SUBCASE("count mode picks the K smallest nonzero") {
    auto band = select_band(sp, BandSpec::count(3));
    CHECK(band == std::vector<int>{1, 2, 3});
  }
  SUBCASE("range mode tests sqrt(lambda)") {
    auto narrow = select_band(sp, BandSpec::range(1.5, 2.5));
    CHECK(narrow == std::vector<int>{2});  // sqrt(4) = 2
    auto wide = select_band(sp, BandSpec::range(1.5, 3.5));
    CHECK(wide == std::vector<int>{2, 3});  // sqrt(9) = 3 also qualifies
  }
  SUBCASE("full complement") {
    auto band = select_band(sp, BandSpec::count(4));
    CHECK(band == std::vector<int>{1, 2, 3, 4});
  }
  SUBCASE("count beyond S-1 rejected") {
    CHECK_THROWS_AS(select_band(sp, BandSpec::count(5)), Error);
  }
  SUBCASE("empty range band") {
    auto band = select_band(sp, BandSpec::range(50.0, 60.0));
    CHECK(band.empty());
  }
}

TEST_CASE("frequency response formula and resonance") {
  CHECK(freq_response_sq(1.0, 1.0, 0.0) == doctest::Approx(1.0));
  // closed-form peak for lambda = 4, gamma = 0.2
  const double peak = 1.0 / (0.04 * (4.0 - 0.01));
  const double w_star = std::sqrt(4.0 - 0.02);
  CHECK(freq_response_sq(4.0, 0.2, w_star) == doctest::Approx(peak).epsilon(1e-12));

  // grid search lands on the analytic resonant frequency
  double best_w = 0, best = -1;
  for (double w = 0; w <= 4.0; w += 1e-4) {
    const double h2 = freq_response_sq(4.0, 0.2, w);
    if (h2 > best) {
      best = h2;
      best_w = w;
    }
  }
  CHECK(best_w == doctest::Approx(w_star).epsilon(1e-3));

  // strictly decreasing beyond the resonance
  double prev = freq_response_sq(4.0, 0.2, w_star);
  for (double w = w_star + 0.01; w < 10; w += 0.01) {
    const double cur = freq_response_sq(4.0, 0.2, w);
    CHECK(cur < prev);
    prev = cur;
  }
}

TEST_CASE("eigenstate variance") {
  CHECK(eigenstate_variance(1.0, 1.0) == doctest::Approx(0.5));
  CHECK(eigenstate_variance(2.0, 0.25) == doctest::Approx(1.0));
  CHECK_THROWS_AS(eigenstate_variance(0.0, 1.0), Error);

  // quadrature of the squared impulse response reproduces 1/(2 lambda gamma)
  for (auto [lam, gam] : {std::pair{1.0, 1.0}, {0.1, 10.0}, {4.0, 0.1467}, {2.5, 3.0}}) {
    CHECK(impulse_energy(lam, gam) ==
          doctest::Approx(1.0 / (2 * lam * gam)).epsilon(1e-6));
  }
}

TEST_CASE("stability metric") {
  SwingSpectrum sp;
  sp.eigvals.resize(3);
  sp.eigvals << 0, 1, 2;
  sp.band = {1, 2};
  CHECK(stability_metric(sp, 0.5) == doctest::Approx(1.5));

  SUBCASE("zero eigenvalue inside the band is rejected") {
    sp.band = {0, 1};
    CHECK_THROWS_AS(stability_metric(sp, 0.5), Error);
  }
  SUBCASE("monotone decreasing in every band eigenvalue") {
    SwingSpectrum sp2 = sp;
    sp2.eigvals[1] = 1.5;
    CHECK(stability_metric(sp2, 0.5) < stability_metric(sp, 0.5));
  }
}

TEST_CASE("f_delta bounds") {
  VectorXd uniform = VectorXd::Constant(4, 4.0);
  auto [lo, hi] = f_delta_bounds(1.0, uniform);
  CHECK(lo == doctest::Approx(0.5));
  CHECK(hi == doctest::Approx(0.5));

  VectorXd spread(2);
  spread << 1.0, 100.0;
  auto [lo2, hi2] = f_delta_bounds(10.0, spread);
  CHECK(lo2 == doctest::Approx(1.0));
  CHECK(hi2 == doctest::Approx(10.0));
  CHECK(lo2 <= hi2);
}

TEST_CASE("mode-1 contribution is a uniform angle shift") {
  std::mt19937_64 rng(6);
  KronModel kron = toy_kron(6, rng);
  OperatingPoint op = random_admissible_op(6, rng);
  MatrixXd L = laplacian_from_angles(op, kron).L;
  VectorXd m(6);
  std::uniform_real_distribution<double> ur(0.2, 3.0);
  for (int i = 0; i < 6; ++i) m[i] = ur(rng);
  SwingSpectrum sp = spectrum(L, m);
  VectorXd shift = m.cwiseSqrt().cwiseInverse().asDiagonal() * sp.eigvecs.col(0);
  shift /= shift[0];
  CHECK((shift - VectorXd::Ones(6)).cwiseAbs().maxCoeff() < 1e-10);
}
