#include <doctest.h>

#include <fstream>

#include "floqsens/fock.hpp"
#include "floqsens/lattice.hpp"
#include "floqsens/metrology.hpp"

using namespace floqsens;
using namespace floqsens::fock;
using floquet::TwoToneModel;

namespace {

TwoToneModel polarization() {
  return floquet::model_library("polarization",
                                {{"omega0", 1.0}, {"omega", 1.0}, {"amplitude", 0.5}});
}

Vec sigma_x_plus() {
  Vec v(2);
  v << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  return v;
}

Mat dense_hq(const QuantizedModel& qm) {
  Mat h = Mat::Zero(qm.dim(), qm.dim());
  std::vector<cxd> e(qm.dim(), cxd(0, 0)), col(qm.dim());
  for (long k = 0; k < qm.dim(); ++k) {
    e[k] = 1;
    qm.apply(e.data(), col.data());
    for (long r = 0; r < qm.dim(); ++r) h(r, k) = col[r];
    e[k] = 0;
  }
  return h;
}

}  // namespace

TEST_CASE("zero-amplitude model quantizes to H0 + HB exactly") {
  Mat zero = Mat::Zero(2, 2);
  TwoToneModel m = floquet::make_two_tone(0.4 * ops::sigma_z(), zero, zero, zero, zero, 1.0, 1.0);
  QuantizedModel qm = quantize(m, 3, 3, 6);
  Mat h = dense_hq(qm);
  FockState tmp;
  tmp.d = 2;
  tmp.n_max = 6;
  for (int l = 0; l < 2; ++l)
    for (int n1 = 0; n1 <= 6; ++n1)
      for (int n2 = 0; n2 <= 6; ++n2) {
        long k = tmp.index(l, n1, n2);
        double expect = (l == 0 ? 0.4 : -0.4) + 1.0 * n1 + 1.0 * n2;
        CHECK(std::abs(h(k, k) - expect) < 1e-14);
      }
  CHECK((h - Mat(h.diagonal().asDiagonal())).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("quantized couplings are Hermitian and near-classical at n = n_c") {
  TwoToneModel m = polarization();
  QuantizedModel qm = quantize(m, 25, 25, 40);
  Mat h = dense_hq(qm);
  CHECK((h - h.adjoint()).cwiseAbs().maxCoeff() < 1e-10);
  // matrix element between (l=0, 25, 25) and (l=1, 24, 25): the sx and sy
  // couplings combine into a one-sided (co-rotating) leg of full amplitude
  // A sqrt(n)/sqrt(n_c) = A at n = n_c
  FockState tmp;
  tmp.d = 2;
  tmp.n_max = 40;
  long a = tmp.index(0, 25, 25), b = tmp.index(1, 24, 25);
  CHECK(std::abs(h(b, a)) == doctest::Approx(0.5).epsilon(1e-10));
  // and the counter-rotating leg vanishes for circular polarization
  long b2 = tmp.index(1, 26, 25);
  CHECK(std::abs(h(b2, a)) < 1e-12);
}

TEST_CASE("drive inputs: Fock and coherent moments") {
  Vec q(2);
  q << 1, 0;
  FockState f = drive_input(InputKind::Fock, 5, 5, 0, 0, 12, q);
  CHECK(std::abs(f.amp[f.index(0, 5, 5)] - cxd(1, 0)) < 1e-14);
  CHECK(f.norm2() == doctest::Approx(1.0));

  FockState c = drive_input(InputKind::Coherent, 4, 4, 0.7, 0.0, 30, q);
  double mean = 0;
  cxd a1(0, 0);
  for (int n1 = 0; n1 <= 30; ++n1)
    for (int n2 = 0; n2 <= 30; ++n2) {
      mean += std::norm(c.amp[c.index(0, n1, n2)]) * n1;
      if (n1 + 1 <= 30)
        a1 += std::conj(c.amp[c.index(0, n1, n2)]) * std::sqrt(n1 + 1.0) *
              c.amp[c.index(0, n1 + 1, n2)];
    }
  CHECK(mean == doctest::Approx(4.0).epsilon(1e-6));
  CHECK(std::abs(a1 - std::sqrt(4.0) * std::exp(iu * 0.7)) < 1e-6);
  // truncation too tight for the coherent tail
  CHECK_THROWS(drive_input(InputKind::Coherent, 20, 20, 0, 0, 22, q));
}

TEST_CASE("diagonal model evolves basis states by pure phases") {
  Mat zero = Mat::Zero(2, 2);
  TwoToneModel m = floquet::make_two_tone(0.4 * ops::sigma_z(), zero, zero, zero, zero, 1.0, 1.0);
  QuantizedModel qm = quantize(m, 3, 3, 8);
  Vec q(2);
  q << 0, 1;
  FockState s0 = drive_input(InputKind::Fock, 3, 2, 0, 0, 8, q);
  double t = 2.37;
  FockState st = evolve_fock(qm, s0, t);
  cxd expect = std::exp(-iu * ((-0.4 + 3.0 + 2.0) * t));
  CHECK(std::abs(st.amp[st.index(1, 3, 2)] - expect) < 1e-8);
}

TEST_CASE("eigenstate of the quantized model only picks up a global phase") {
  TwoToneModel m = polarization();
  QuantizedModel qm = quantize(m, 3, 3, 8);
  Mat h = dense_hq(qm);
  Eigen::SelfAdjointEigenSolver<Mat> es(h);
  FockState s;
  s.d = 2;
  s.n_max = 8;
  s.amp.assign(qm.dim(), cxd(0, 0));
  int pick = static_cast<int>(qm.dim() / 3);
  for (long k = 0; k < qm.dim(); ++k) s.amp[k] = es.eigenvectors()(k, pick);
  EvolveOptions opt;
  opt.breach_tol = 1.0;  // eigenstates are delocalized; the shell monitor is moot here
  FockState st = evolve_fock(qm, s, 1.7, opt);
  cxd phase = std::exp(-iu * (es.eigenvalues()(pick) * 1.7));
  double worst = 0;
  for (long k = 0; k < qm.dim(); ++k)
    worst = std::max(worst, std::abs(st.amp[k] - phase * s.amp[k]));
  CHECK(worst < 1e-7);
}

TEST_CASE("energy conservation and norm under Krylov evolution") {
  TwoToneModel m = polarization();
  int n_max = default_n_max(10);
  QuantizedModel qm = quantize(m, 10, 10, n_max);
  FockState s = drive_input(InputKind::Fock, 10, 10, 0, 0, n_max, sigma_x_plus());
  double e0 = qm.energy_mean(s);
  FockState st = evolve_fock(qm, s, 6 * qm.t_com);
  CHECK(st.norm2() == doctest::Approx(1.0).epsilon(1e-8));
  double e1 = qm.energy_mean(st);
  CHECK(std::abs(e1 - e0) < 1e-7 * std::max(1.0, std::abs(e0)));
}

TEST_CASE("truncation breach raises instead of silently absorbing") {
  TwoToneModel m = polarization();
  QuantizedModel qm = quantize(m, 6, 6, 9);
  FockState s = drive_input(InputKind::Fock, 6, 6, 0, 0, 9, sigma_x_plus());
  CHECK_THROWS_AS(evolve_fock(qm, s, 20 * qm.t_com), TruncationBreach);
}

TEST_CASE("pes projection: completeness and t = 0 certainty") {
  TwoToneModel m = polarization();
  int n_max = default_n_max(8);
  QuantizedModel qm = quantize(m, 8, 8, n_max);
  Vec anc = sigma_x_plus();
  FockState s0 = drive_input(InputKind::Fock, 8, 8, 0, 0, n_max, anc);
  PesFockResult p0 = pes_fock(s0, anc);
  CHECK(p0.success == doctest::Approx(1.0).epsilon(1e-12));
  FockState st = evolve_fock(qm, s0, 4 * qm.t_com);
  PesFockResult plus = pes_fock(st, anc);
  Vec anc_minus(2);
  anc_minus << -1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  PesFockResult minus = pes_fock(st, anc_minus);
  CHECK(plus.success + minus.success == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("early-time fock QFI matches the lattice, then saturates") {
  TwoToneModel m = polarization();
  const int nc = 10;
  int n_max = default_n_max(nc);
  QuantizedModel qm = quantize(m, nc, nc, n_max);
  Vec anc = sigma_x_plus();
  FockState st = drive_input(InputKind::Fock, nc, nc, 0, 0, n_max, anc);

  ops::PhaseGrid grid(64);
  floquet::FloquetSpectrum sp = floquet::quasienergies(m, grid, 1000);
  lattice::FieldDistribution f = lattice::fock_uniform(grid, nc, nc);

  double t_prev = 0;
  for (long k : {1L, 2L, 3L}) {  // up to 0.3 n_c T_com
    double t_abs = k * qm.t_com;
    st = evolve_fock(qm, st, t_abs - t_prev);
    t_prev = t_abs;
    PesFockResult pes = pes_fock(st, anc);
    double f_fock = metrology::qfi_pure_jz_fock(n_max, pes.amp);
    double f_latt = metrology::qfi_pure_jz(lattice::pes_at(sp, f, anc, k));
    CHECK(std::abs(std::sqrt(f_fock) - std::sqrt(f_latt)) / std::sqrt(f_latt) < 0.10);
  }
  // long-time: growth halts well below the lattice line
  st = evolve_fock(qm, st, 12 * qm.t_com - t_prev);
  PesFockResult pes = pes_fock(st, anc);
  double f_fock = metrology::qfi_pure_jz_fock(n_max, pes.amp);
  double f_latt = metrology::qfi_pure_jz(lattice::pes_at(sp, f, anc, 12));
  CHECK(std::sqrt(f_fock) < 0.75 * std::sqrt(f_latt));
}

TEST_CASE("state snapshot export writes the advertised columns") {
  Vec q(2);
  q << 1, 0;
  FockState f = drive_input(InputKind::Fock, 2, 3, 0, 0, 5, q);
  std::string path = "fock_snapshot_test.csv";
  write_state_csv(f, path);
  std::ifstream in(path);
  std::string header, row;
  std::getline(in, header);
  CHECK(header == "lambda,n1,n2,re,im");
  std::getline(in, row);
  CHECK(row == "0,2,3,1,0");
  in.close();
  std::remove(path.c_str());
}
