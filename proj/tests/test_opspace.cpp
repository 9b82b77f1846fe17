#include <doctest.h>

#include <random>

#include "floqsens/opspace.hpp"

using namespace floqsens;
using namespace floqsens::ops;

namespace {

TwoModeWave random_wave(int m, int seed, int n1c = 0, int n2c = 0) {
  TwoModeWave w;
  w.grid = PhaseGrid(m);
  w.n1c = n1c;
  w.n2c = n2c;
  w.amp.resize(w.grid.num_points());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  double n2 = 0;
  for (auto& a : w.amp) {
    a = cxd(g(rng), g(rng));
    n2 += std::norm(a);
  }
  for (auto& a : w.amp) a /= std::sqrt(n2);
  return w;
}

Vec basis_state(int n1, int n2, int n_max) {
  const int M = n_max + 1;
  Vec v = Vec::Zero(static_cast<long>(M) * M);
  v(fock_index(n1, n2, n_max)) = 1;
  return v;
}

}  // namespace

TEST_CASE("angular momentum definitions on single excitations") {
  auto jz = build_angular_momentum('z', 4);
  auto jx = build_angular_momentum('x', 4);
  Vec v10 = basis_state(1, 0, 4);
  // Jz |1,0> = +1/2 |1,0>
  Vec r = jz.mat * v10;
  CHECK((r - 0.5 * v10).norm() < 1e-14);
  // Jx |1,0> = (1/2) |0,1>
  r = jx.mat * v10;
  CHECK((r - 0.5 * basis_state(0, 1, 4)).norm() < 1e-14);
}

TEST_CASE("Jy^2 on the twin occupation |2,2>") {
  // brute-force matrix value in the N=4 block: N(N+2)/8 = 3
  auto jy = build_angular_momentum('y', 4);
  Vec v = basis_state(2, 2, 4);
  Vec jyv = jy.mat * v;
  CHECK(jyv.squaredNorm() == doctest::Approx(3.0).epsilon(1e-12));
  // same through the dense quadratic form
  Mat jy2 = Mat(jy.mat) * Mat(jy.mat);
  CHECK((v.adjoint() * jy2 * v)(0).real() == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("commutator [Jx,Jy] = i Jz on truncated blocks") {
  for (int n_max : {2, 5, 8}) {
    Mat jx = Mat(build_angular_momentum('x', n_max).mat);
    Mat jy = Mat(build_angular_momentum('y', n_max).mat);
    Mat jz = Mat(build_angular_momentum('z', n_max).mat);
    Mat comm = jx * jy - jy * jx - iu * jz;
    // the truncation only breaks the commutator outside fixed-N blocks it maps
    // out of; check block by block
    const int M = n_max + 1;
    double worst = 0;
    for (int N = 0; N <= n_max; ++N) {
      // indices with n1+n2 = N
      for (int a1 = 0; a1 <= N; ++a1)
        for (int b1 = 0; b1 <= N; ++b1) {
          long a = fock_index(a1, N - a1, n_max), b = fock_index(b1, N - b1, n_max);
          worst = std::max(worst, std::abs(comm(a, b)));
        }
    }
    (void)M;
    CHECK(worst < 1e-10);
  }
}

TEST_CASE("swap squares to identity") {
  auto s = swap_operator(6);
  Mat s2 = Mat(s.mat) * Mat(s.mat);
  CHECK((s2 - Mat::Identity(s2.rows(), s2.cols())).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("number-conserving operators keep total-N blocks") {
  const int n_max = 5;
  for (char kind : {'x', 'y', 'z'}) {
    Mat op = Mat(build_angular_momentum(kind, n_max).mat);
    for (int n1 = 0; n1 <= n_max; ++n1)
      for (int n2 = 0; n2 <= n_max; ++n2)
        for (int m1 = 0; m1 <= n_max; ++m1)
          for (int m2 = 0; m2 <= n_max; ++m2)
            if (n1 + n2 != m1 + m2)
              CHECK(std::abs(op(fock_index(n1, n2, n_max), fock_index(m1, m2, n_max))) == 0.0);
  }
}

TEST_CASE("invalid angular momentum kind") {
  CHECK_THROWS_AS(build_angular_momentum('q', 4), std::invalid_argument);
}

TEST_CASE("grid must be a power of two") {
  CHECK_THROWS_AS(PhaseGrid(12), std::invalid_argument);
  CHECK_NOTHROW(PhaseGrid(16));
}

TEST_CASE("phase_to_number of uniform amplitudes concentrates at zero") {
  const int m = 32;
  std::vector<cxd> g(static_cast<size_t>(m) * m, cxd(1.0 / m, 0)), psi;
  phase_to_number(g, psi, m);
  PhaseGrid grid(m);
  for (int i1 = 0; i1 < m; ++i1)
    for (int i2 = 0; i2 < m; ++i2) {
      double expect = (i1 == 0 && i2 == 0) ? 1.0 : 0.0;
      CHECK(std::abs(psi[grid.index(i1, i2)] - expect) < 1e-12);
    }
}

TEST_CASE("a single Fourier mode lands on m1 = -1") {
  const int m = 32;
  PhaseGrid grid(m);
  std::vector<cxd> g(grid.num_points()), psi;
  for (int i1 = 0; i1 < m; ++i1)
    for (int i2 = 0; i2 < m; ++i2)
      g[grid.index(i1, i2)] = std::exp(iu * grid.point(i1)) / double(m);
  phase_to_number(g, psi, m);
  // all weight at rel (m1, m2) = (-1, 0), i.e. index (m-1, 0)
  CHECK(std::abs(psi[grid.index(m - 1, 0)] - cxd(1, 0)) < 1e-12);
  double rest = 0;
  for (long k = 0; k < grid.num_points(); ++k)
    if (k != grid.index(m - 1, 0)) rest += std::norm(psi[k]);
  CHECK(rest < 1e-20);
}

TEST_CASE("round trip number -> phase -> number is the identity") {
  const int m = 16;
  TwoModeWave w = random_wave(m, 7);
  std::vector<cxd> phase, back;
  number_to_phase(w.amp, phase, m);
  phase_to_number(phase, back, m);
  double worst = 0;
  for (size_t k = 0; k < back.size(); ++k) worst = std::max(worst, std::abs(back[k] - w.amp[k]));
  CHECK(worst < 1e-12);
}

TEST_CASE("transform preserves norm and spectral <Jz>") {
  const int m = 32;
  TwoModeWave w = random_wave(m, 11, 5, 5);
  std::vector<cxd> phase;
  number_to_phase(w.amp, phase, m);
  double n2 = 0;
  for (const auto& a : phase) n2 += std::norm(a);
  CHECK(n2 == doctest::Approx(1.0).epsilon(1e-12));
  // spectral derivative: <Jz> = sum_m (n1c+m1 - n2c-m2)/2 |psi|^2 equals the
  // phase-space expectation of -(i/2)(d/dphi1 - d/dphi2), evaluated by
  // differentiating the Fourier series exactly
  JzMoments direct = jz_moments(w);
  cxd acc(0, 0);
  PhaseGrid grid(m);
  std::vector<cxd> dpsi(w.amp.size());
  for (int i1 = 0; i1 < m; ++i1)
    for (int i2 = 0; i2 < m; ++i2)
      dpsi[grid.index(i1, i2)] =
          0.5 *
          ((w.n1c + grid.rel_n(i1)) - (w.n2c + grid.rel_n(i2))) *
          w.amp[grid.index(i1, i2)];
  std::vector<cxd> dphase;
  number_to_phase(dpsi, dphase, m);
  for (size_t k = 0; k < phase.size(); ++k) acc += std::conj(phase[k]) * dphase[k];
  CHECK(acc.real() == doctest::Approx(direct.mean).epsilon(1e-9));
  CHECK(std::abs(acc.imag()) < 1e-9);
}

TEST_CASE("parity-swap expectation closed forms") {
  // N00N with N=4: <Pi_theta> = cos(4 theta)
  const int m = 16;
  PhaseGrid grid(m);
  TwoModeWave w;
  w.grid = grid;
  w.n1c = w.n2c = 8;
  w.amp.assign(grid.num_points(), cxd(0, 0));
  auto rel_index = [&](int r) { return r >= 0 ? r : r + m; };
  // |N,0> + |0,N> around the offset: rel (+2,-2) and (-2,+2)
  w.amp[grid.index(rel_index(2), rel_index(-2))] = 1.0 / std::sqrt(2.0);
  w.amp[grid.index(rel_index(-2), rel_index(2))] = 1.0 / std::sqrt(2.0);
  for (double th : {0.0, pi / 8, 0.3, 1.7}) {
    cxd p = parity_swap_expectation(w, th);
    CHECK(p.real() == doctest::Approx(std::cos(4 * th)).epsilon(1e-12));
    CHECK(std::abs(p.imag()) < 1e-12);
  }
  CHECK(std::abs(parity_swap_expectation(w, pi / 8)) < 1e-12);  // cos(4 pi/8) = 0

  // |n,n> gives 1 for any theta
  TwoModeWave d;
  d.grid = grid;
  d.n1c = d.n2c = 6;
  d.amp.assign(grid.num_points(), cxd(0, 0));
  d.amp[grid.index(0, 0)] = 1;
  CHECK(parity_swap_expectation(d, 0.71).real() == doctest::Approx(1.0));

  // |1,0>: swap-orthogonal at theta = 0
  TwoModeWave e;
  e.grid = grid;
  e.n1c = e.n2c = 4;
  e.amp.assign(grid.num_points(), cxd(0, 0));
  e.amp[grid.index(1, 0)] = 1;
  CHECK(std::abs(parity_swap_expectation(e, 0.0)) < 1e-14);
}

TEST_CASE("parity magnitude bounded by one on random states") {
  TwoModeWave w = random_wave(16, 23, 9, 9);
  for (double th : {0.1, 0.9, 2.4, 5.0})
    CHECK(std::abs(parity_swap_expectation(w, th)) <= 1.0 + 1e-10);
}

TEST_CASE("decoded MZI parity equals the swap form on random states") {
  // exp(+i theta Jz) ... composed identity:
  //   U_theta^dag U_de^dag Pi U_de U_theta = e^{2 i Jz (theta - pi/2)} S
  const int n_max = 8;  // states with N <= 8
  Mat ude = mzi_decoder(n_max);
  Mat par = Mat(mode2_parity(n_max).mat);
  Mat jz = Mat(build_angular_momentum('z', n_max).mat);
  Mat s = Mat(swap_operator(n_max).mat);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  for (double theta : {0.0, 0.37, 1.2}) {
    Vec phz = (-iu * theta * jz.diagonal().array()).exp();
    Mat utheta = phz.asDiagonal();
    Mat lhs = utheta.adjoint() * ude.adjoint() * par * ude * utheta;
    Vec ph2 = (2.0 * iu * (theta - pi / 2) * jz.diagonal().array()).exp();
    Mat rhs = Mat(ph2.asDiagonal()) * s;
    // compare on random states restricted to N <= n_max (rows/cols with
    // n1+n2 <= n_max stay inside the truncation under every factor)
    for (int trial = 0; trial < 4; ++trial) {
      Vec v = Vec::Zero(lhs.rows());
      for (int n1 = 0; n1 <= n_max; ++n1)
        for (int n2 = 0; n2 <= n_max - n1; ++n2)
          v(fock_index(n1, n2, n_max)) = cxd(g(rng), g(rng));
      v.normalize();
      CHECK((lhs * v - rhs * v).norm() < 1e-8);
    }
  }
}
