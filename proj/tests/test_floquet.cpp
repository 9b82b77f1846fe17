#include <doctest.h>

#include "floqsens/floquet.hpp"

using namespace floqsens;
using namespace floqsens::floquet;

namespace {

TwoToneModel circular(double w0 = 1.0, double w = 0.25, double a = 0.125) {
  return model_library("circular", {{"omega0", w0}, {"omega", w}, {"amplitude", a}});
}

double circular_eps_folded(double w0, double w, double a, double dphi, int band) {
  double r = std::sqrt((w0 - w) * (w0 - w) + 16 * a * a * std::pow(std::cos(dphi / 2), 2));
  double e = 0.5 * (w + (band == 0 ? -r : r));
  return fold_interval(e, w);  // w_com = w for equal frequencies
}

}  // namespace

TEST_CASE("commensurability reduction") {
  auto c = commensurate(0.25, 0.25);
  CHECK(c.p == 1);
  CHECK(c.q == 1);
  c = commensurate(2.0, 3.0);
  CHECK(c.p == 2);
  CHECK(c.q == 3);
  c = commensurate(0.6, 1.0);
  CHECK(c.p == 3);
  CHECK(c.q == 5);
  CHECK_THROWS_AS(commensurate(1.0, 3.14159265358979323846), std::invalid_argument);
}

TEST_CASE("zero-coupling propagator is exp(-i H0 T)") {
  Mat zero = Mat::Zero(2, 2);
  TwoToneModel m = make_two_tone(0.7 * ops::sigma_z(), zero, zero, zero, zero, 1.0, 1.0);
  double T = m.t_com();
  Mat u = propagate(m, 0.3, 1.1, T, 500);
  Mat expect = hermitian_exp(0.7 * ops::sigma_z(), T);
  CHECK((u - expect).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("commuting zeeman family integrates to a scalar phase") {
  TwoToneModel m = model_library(
      "zeeman", {{"g", 1.0}, {"b0", 1.0}, {"b1", 0.8}, {"b2", 0.5}, {"omega1", 1.0},
                 {"omega2", 2.0}});
  double phi1 = 0.4, phi2 = 2.2;
  double T = m.t_com();
  // integral of B(t) over [0, T]
  double ib = 1.0 * T + 0.8 / 1.0 * (std::sin(1.0 * T + phi1) - std::sin(phi1)) +
              0.5 / 2.0 * (std::sin(2.0 * T + phi2) - std::sin(phi2));
  Mat expect = hermitian_exp(-ib * ops::spin_z(2), 1.0);
  Mat u = propagate(m, phi1, phi2, T, 2000);
  CHECK((u - expect).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("propagator unitarity and second-order convergence") {
  TwoToneModel m = circular();
  Mat u = propagate(m, 0.7, 0.2, m.t_com(), 400);
  CHECK((u * u.adjoint() - Mat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-10);
  // error vs a fine reference drops by >= 3x per step doubling
  Mat ref = propagate(m, 0.7, 0.2, m.t_com(), 51200);
  double e1 = (propagate(m, 0.7, 0.2, m.t_com(), 400) - ref).cwiseAbs().maxCoeff();
  double e2 = (propagate(m, 0.7, 0.2, m.t_com(), 800) - ref).cwiseAbs().maxCoeff();
  double e3 = (propagate(m, 0.7, 0.2, m.t_com(), 1600) - ref).cwiseAbs().maxCoeff();
  CHECK(e1 / e2 >= 3.0);
  CHECK(e2 / e3 >= 3.0);
}

TEST_CASE("circular quasienergies match the closed form") {
  TwoToneModel m = circular();
  ops::PhaseGrid grid(16);
  FloquetSpectrum s = quasienergies(m, grid, 4000);
  // at dphi = 0 the folded branches are +-0.075694
  long idx0 = grid.index(0, 0);
  CHECK(std::abs(s.eps[idx0 * 2 + 0] + 0.0756939) < 1e-5);
  CHECK(std::abs(s.eps[idx0 * 2 + 1] - 0.0756939) < 1e-5);
  double worst = 0;
  for (long idx = 0; idx < grid.num_points(); ++idx) {
    int i1 = static_cast<int>(idx / grid.m), i2 = static_cast<int>(idx % grid.m);
    double dphi = grid.point(i1) - grid.point(i2);
    // compare as unordered folded pairs
    double a0 = circular_eps_folded(1.0, 0.25, 0.125, dphi, 0);
    double a1 = circular_eps_folded(1.0, 0.25, 0.125, dphi, 1);
    double e0 = s.eps[idx * 2 + 0], e1 = s.eps[idx * 2 + 1];
    double d1 = std::max(circle_dist(e0, a0, s.omega_com), circle_dist(e1, a1, s.omega_com));
    double d2 = std::max(circle_dist(e0, a1, s.omega_com), circle_dist(e1, a0, s.omega_com));
    worst = std::max(worst, std::min(d1, d2));
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("eigenvector residual and orthonormality at grid points") {
  TwoToneModel m = circular();
  ops::PhaseGrid grid(8);
  FloquetSpectrum s = quasienergies(m, grid, 2000);
  for (long idx = 0; idx < grid.num_points(); ++idx) {
    int i1 = static_cast<int>(idx / grid.m), i2 = static_cast<int>(idx % grid.m);
    Mat u = propagate(m, grid.point(i1), grid.point(i2), s.t_com, 2000);
    Mat v = s.basis(idx);
    CHECK((v.adjoint() * v - Mat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-10);
    for (int n = 0; n < 2; ++n) {
      cxd lam = std::exp(-iu * (s.eps[idx * 2 + n] * s.t_com));
      CHECK((u * v.col(n) - lam * v.col(n)).norm() < 1e-8);
    }
  }
}

TEST_CASE("zeeman bands are flat and power operators vanish") {
  TwoToneModel m = model_library("zeeman", {{"g", 1.0}, {"b0", 1.0}, {"omega1", 1.0}});
  ops::PhaseGrid grid(16);
  FloquetSpectrum s = quasienergies(m, grid, 1000);
  double e0 = s.eps[0], e1 = s.eps[1];
  for (long idx = 0; idx < grid.num_points(); ++idx) {
    CHECK(circle_dist(s.eps[idx * 2 + 0], e0, s.omega_com) < 1e-9);
    CHECK(circle_dist(s.eps[idx * 2 + 1], e1, s.omega_com) < 1e-9);
    CHECK(s.power_matrix(idx, 1).cwiseAbs().maxCoeff() < 1e-7);
    CHECK(s.power_matrix(idx, 2).cwiseAbs().maxCoeff() < 1e-7);
  }
}

TEST_CASE("polarization spectrum is symmetric under phase exchange") {
  TwoToneModel m = model_library("polarization", {{"omega0", 1.0}, {"omega", 1.0},
                                                  {"amplitude", 0.5}});
  ops::PhaseGrid grid(32);
  FloquetSpectrum s = quasienergies(m, grid, 1500);
  double worst = 0;
  for (int i1 = 0; i1 < grid.m; ++i1)
    for (int i2 = 0; i2 < grid.m; ++i2) {
      long a = grid.index(i1, i2), b = grid.index(i2, i1);
      // compare sorted folded pairs via circle distance
      double d = std::min(
          std::max(circle_dist(s.eps[a * 2], s.eps[b * 2], s.omega_com),
                   circle_dist(s.eps[a * 2 + 1], s.eps[b * 2 + 1], s.omega_com)),
          std::max(circle_dist(s.eps[a * 2], s.eps[b * 2 + 1], s.omega_com),
                   circle_dist(s.eps[a * 2 + 1], s.eps[b * 2], s.omega_com)));
      worst = std::max(worst, d);
    }
  CHECK(worst < 1e-8);
}

TEST_CASE("quasienergies depend only on the phase difference (equal frequencies)") {
  TwoToneModel m = circular();
  ops::PhaseGrid grid(16);
  FloquetSpectrum s = quasienergies(m, grid, 1500);
  for (int i1 = 0; i1 < grid.m; ++i1)
    for (int i2 = 0; i2 < grid.m; ++i2) {
      long a = grid.index(i1, i2);
      long b = grid.index(grid.wrap(i1 - i2), 0);
      for (int n = 0; n < 2; ++n)
        CHECK(circle_dist(s.eps[a * 2 + n], s.eps[b * 2 + n], s.omega_com) < 1e-9);
    }
}

TEST_CASE("power identities on the gallery") {
  for (const char* name : {"circular", "polarization", "specific"}) {
    TwoToneModel m = model_library(
        name, {{"omega0", 1.0},
               {"omega", std::string(name) == "circular" ? 0.25 : 1.0},
               {"amplitude", std::string(name) == "circular" ? 0.125 : 0.5}});
    FloquetSpectrum s = quasienergies(m, ops::PhaseGrid(16), 3000);
    PowerIdentity id = power_identity(s);
    CHECK(id.max_trace < 1e-8);
    CHECK(id.max_energy_conservation < 1e-8);
  }
}

TEST_CASE("circular power operator derivative oracle at dphi = 0.6 pi") {
  // analytic d eps / d(dphi) = -2 A^2 sin(dphi) / R from the closed form
  TwoToneModel m = circular();
  ops::PhaseGrid grid(64);
  FloquetSpectrum s = quasienergies(m, grid, 2000);
  double dphi = 0.6 * pi;
  double r = std::sqrt(0.75 * 0.75 + 16 * 0.125 * 0.125 * std::pow(std::cos(dphi / 2), 2));
  double expect = 2 * 0.125 * 0.125 * std::sin(dphi) / r;  // 0.0369
  // nearest grid point to (0.6 pi, 0)
  int i1 = static_cast<int>(std::lround(dphi / grid.spacing()));
  long idx = grid.index(i1, 0);
  Mat p = s.power_matrix(idx, 1);
  Eigen::SelfAdjointEigenSolver<Mat> es(p);
  CHECK(std::abs(es.eigenvalues()(1) - expect) < 2e-3);
  CHECK(std::abs(es.eigenvalues()(0) + expect) < 2e-3);
  // derived qubit states |P>, |-P>
  PowerStates ps = power_states(s, idx, 1);
  CHECK(ps.value == doctest::Approx(es.eigenvalues()(1)).epsilon(1e-6));
  CHECK(std::abs((ps.plus.adjoint() * p * ps.plus)(0).real() - ps.value) < 1e-9);
}

TEST_CASE("energy transfer: zeeman stays bounded, circular reverses with the state") {
  TwoToneModel z = model_library("zeeman", {{"g", 1.0}, {"b0", 1.0}, {"omega1", 1.0}});
  Vec up(2);
  up << 1, 0;
  EnergyTrace t = energy_transfer_trace(z, 0.3, 0.9, up, 10 * z.t_com(), 600);
  for (double e : t.e1) CHECK(std::abs(e) < 1.0);
  CHECK(std::abs(t.avg_power(1, t.t.size() - 1)) < 0.05);

  TwoToneModel c = model_library("circular",
                                 {{"omega0", 1.0}, {"omega", 0.25}, {"amplitude", 0.125}});
  FloquetSpectrum s = quasienergies(c, ops::PhaseGrid(8), 2000);
  double dphi = 0.6 * pi;
  ops::PhaseGrid g64(64);
  FloquetSpectrum s64 = quasienergies(c, g64, 2000);
  long idx = g64.index(static_cast<int>(std::lround(dphi / g64.spacing())), 0);
  PowerStates ps = power_states(s64, idx, 1);
  double horizon = 40 * c.t_com();
  EnergyTrace tp = energy_transfer_trace(c, g64.point(static_cast<int>(idx / 64)), 0.0, ps.plus,
                                         horizon, 1000);
  EnergyTrace tm = energy_transfer_trace(c, g64.point(static_cast<int>(idx / 64)), 0.0, ps.minus,
                                         horizon, 1000);
  double pp = tp.avg_power(1, tp.t.size() - 1);
  double pm = tm.avg_power(1, tm.t.size() - 1);
  // opposite long-time transfer, matching w1 <P_1> within O(1/T)
  CHECK(pp * pm < 0);
  CHECK(std::abs(pp - 0.25 * ps.value) < 0.25 * ps.value * 0.2);
  CHECK(std::abs(pm + 0.25 * ps.value) < 0.25 * ps.value * 0.2);
  (void)s;
}

TEST_CASE("unknown model and missing parameter") {
  CHECK_THROWS_AS(model_library("nope", {}), std::invalid_argument);
  CHECK_THROWS_AS(model_library("circular", {{"omega0", 1.0}}), std::invalid_argument);
}

TEST_CASE("model decompositions expose the advertised operator structure") {
  TwoToneModel c = model_library("circular",
                                 {{"omega0", 1.0}, {"omega", 0.25}, {"amplitude", 0.125}});
  CHECK((c.h1e - 0.125 * ops::sigma_x()).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((c.h1o - 0.125 * ops::sigma_y()).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((c.h2e - 0.125 * ops::sigma_x()).cwiseAbs().maxCoeff() < 1e-14);

  TwoToneModel p = model_library("polarization",
                                 {{"omega0", 1.0}, {"omega", 1.0}, {"amplitude", 0.5}});
  CHECK((p.h2o + 0.5 * ops::sigma_y()).cwiseAbs().maxCoeff() < 1e-14);  // chirality flip
  CHECK((p.h0 - 0.5 * ops::sigma_x()).cwiseAbs().maxCoeff() < 1e-14);

  TwoToneModel z = model_library("zeeman", {{"g", 1.0}, {"b0", 1.0}, {"omega1", 1.0}});
  CHECK((z.h1e + ops::spin_z(2)).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(z.h1o.cwiseAbs().maxCoeff() == 0.0);
}
