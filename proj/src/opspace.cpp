#include "floqsens/opspace.hpp"

#include <fftw3.h>

#include <mutex>

namespace floqsens::ops {

Mat sigma_x() {
  Mat s(2, 2);
  s << 0, 1, 1, 0;
  return s;
}

Mat sigma_y() {
  Mat s(2, 2);
  s << 0, -iu, iu, 0;
  return s;
}

Mat sigma_z() {
  Mat s(2, 2);
  s << 1, 0, 0, -1;
  return s;
}

Mat spin_z(int d) {
  if (d < 2) throw std::invalid_argument("spin_z: d >= 2 required");
  Mat s = Mat::Zero(d, d);
  double j = (d - 1) / 2.0;
  for (int k = 0; k < d; ++k) s(k, k) = j - k;
  return s;
}

Mat projector(int level, int d) {
  if (level < 0 || level >= d) throw std::invalid_argument("projector: level out of range");
  Mat p = Mat::Zero(d, d);
  p(level, level) = 1;
  return p;
}

bool is_hermitian(const Mat& a, double tol) {
  return (a - a.adjoint()).cwiseAbs().maxCoeff() < tol;
}

PhaseGrid::PhaseGrid(int m_pts) : m(m_pts) {
  if (m < 2 || (m & (m - 1)) != 0)
    throw std::invalid_argument("PhaseGrid: grid size must be a power of two >= 2");
}

TwoModeOperator build_angular_momentum(char kind, int n_max) {
  if (n_max < 1) throw std::invalid_argument("build_angular_momentum: n_max >= 1 required");
  if (kind != 'x' && kind != 'y' && kind != 'z')
    throw std::invalid_argument("build_angular_momentum: kind must be one of x, y, z");
  const int M = n_max + 1;
  std::vector<Eigen::Triplet<cxd>> t;
  for (int n1 = 0; n1 <= n_max; ++n1)
    for (int n2 = 0; n2 <= n_max; ++n2) {
      long col = fock_index(n1, n2, n_max);
      if (kind == 'z') {
        t.emplace_back(col, col, cxd(0.5 * (n1 - n2), 0));
        continue;
      }
      // a1+ a2 : (n1,n2) -> (n1+1, n2-1); Jy = i(a2+ a1 - a1+ a2)/2 so that
      // [Jx, Jy] = i Jz
      if (n1 + 1 <= n_max && n2 - 1 >= 0) {
        double amp = 0.5 * std::sqrt(double(n1 + 1) * n2);
        cxd v = (kind == 'x') ? cxd(amp, 0) : -iu * amp;
        t.emplace_back(fock_index(n1 + 1, n2 - 1, n_max), col, v);
      }
      // a2+ a1 : (n1,n2) -> (n1-1, n2+1)
      if (n1 - 1 >= 0 && n2 + 1 <= n_max) {
        double amp = 0.5 * std::sqrt(double(n1) * (n2 + 1));
        cxd v = (kind == 'x') ? cxd(amp, 0) : iu * amp;
        t.emplace_back(fock_index(n1 - 1, n2 + 1, n_max), col, v);
      }
    }
  TwoModeOperator op;
  op.n_max = n_max;
  op.mat.resize(long(M) * M, long(M) * M);
  op.mat.setFromTriplets(t.begin(), t.end());
  return op;
}

TwoModeOperator swap_operator(int n_max) {
  const int M = n_max + 1;
  std::vector<Eigen::Triplet<cxd>> t;
  for (int n1 = 0; n1 <= n_max; ++n1)
    for (int n2 = 0; n2 <= n_max; ++n2)
      t.emplace_back(fock_index(n2, n1, n_max), fock_index(n1, n2, n_max), cxd(1, 0));
  TwoModeOperator op;
  op.n_max = n_max;
  op.mat.resize(long(M) * M, long(M) * M);
  op.mat.setFromTriplets(t.begin(), t.end());
  return op;
}

TwoModeOperator number_operator(int mode, int n_max) {
  if (mode != 1 && mode != 2) throw std::invalid_argument("number_operator: mode is 1 or 2");
  const int M = n_max + 1;
  std::vector<Eigen::Triplet<cxd>> t;
  for (int n1 = 0; n1 <= n_max; ++n1)
    for (int n2 = 0; n2 <= n_max; ++n2) {
      long k = fock_index(n1, n2, n_max);
      t.emplace_back(k, k, cxd(mode == 1 ? n1 : n2, 0));
    }
  TwoModeOperator op;
  op.n_max = n_max;
  op.mat.resize(long(M) * M, long(M) * M);
  op.mat.setFromTriplets(t.begin(), t.end());
  return op;
}

TwoModeOperator mode2_parity(int n_max) {
  const int M = n_max + 1;
  std::vector<Eigen::Triplet<cxd>> t;
  for (int n1 = 0; n1 <= n_max; ++n1)
    for (int n2 = 0; n2 <= n_max; ++n2) {
      long k = fock_index(n1, n2, n_max);
      t.emplace_back(k, k, cxd(n2 % 2 == 0 ? 1 : -1, 0));
    }
  TwoModeOperator op;
  op.n_max = n_max;
  op.mat.resize(long(M) * M, long(M) * M);
  op.mat.setFromTriplets(t.begin(), t.end());
  return op;
}

Mat mzi_decoder(int n_max) {
  Mat jx = Mat(build_angular_momentum('x', n_max).mat);
  Eigen::SelfAdjointEigenSolver<Mat> es(jx);
  Vec ph = (-iu * (pi / 2) * es.eigenvalues().array().cast<cxd>()).exp();
  return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

double TwoModeWave::norm2() const {
  double s = 0;
  for (const cxd& a : amp) s += std::norm(a);
  return s;
}

bool TwoModeWave::has_negative_occupation() const {
  // any weight on absolute occupations below zero (beyond round-off)
  const int m = grid.m;
  double w = 0;
  for (int i1 = 0; i1 < m; ++i1)
    for (int i2 = 0; i2 < m; ++i2)
      if (n1c + grid.rel_n(i1) < 0 || n2c + grid.rel_n(i2) < 0)
        w += std::norm(amp[grid.index(i1, i2)]);
  return w > 1e-12;
}

namespace {

// FFTW planner access is serialized; plans are cached per grid size.
std::mutex& fft_mutex() {
  static std::mutex mu;
  return mu;
}

struct PlanPair {
  fftw_plan fwd = nullptr, bwd = nullptr;
  int m = 0;
};

PlanPair& plans_for(int m) {
  static std::vector<PlanPair> cache;
  std::lock_guard<std::mutex> lock(fft_mutex());
  for (auto& p : cache)
    if (p.m == m) return p;
  PlanPair p;
  p.m = m;
  std::vector<cxd> buf(static_cast<size_t>(m) * m);
  auto* ptr = reinterpret_cast<fftw_complex*>(buf.data());
  // FFTW_UNALIGNED: plans are reused on caller-owned arrays of any alignment
  p.fwd = fftw_plan_dft_2d(m, m, ptr, ptr, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  p.bwd = fftw_plan_dft_2d(m, m, ptr, ptr, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  cache.push_back(p);
  return cache.back();
}

}  // namespace

void phase_to_number(const std::vector<cxd>& phase_amp, std::vector<cxd>& number_amp, int m) {
  if (phase_amp.size() != static_cast<size_t>(m) * m)
    throw std::invalid_argument("phase_to_number: grid size mismatch");
  number_amp = phase_amp;
  auto& p = plans_for(m);
  // psi(n) = (1/m) sum_k g_k e^{+i phi_k n}: FFTW backward (+i), unitary scale 1/m
  fftw_execute_dft(p.bwd, reinterpret_cast<fftw_complex*>(number_amp.data()),
                   reinterpret_cast<fftw_complex*>(number_amp.data()));
  double s = 1.0 / m;
  for (auto& a : number_amp) a *= s;
}

void number_to_phase(const std::vector<cxd>& number_amp, std::vector<cxd>& phase_amp, int m) {
  if (number_amp.size() != static_cast<size_t>(m) * m)
    throw std::invalid_argument("number_to_phase: grid size mismatch");
  phase_amp = number_amp;
  auto& p = plans_for(m);
  fftw_execute_dft(p.fwd, reinterpret_cast<fftw_complex*>(phase_amp.data()),
                   reinterpret_cast<fftw_complex*>(phase_amp.data()));
  double s = 1.0 / m;
  for (auto& a : phase_amp) a *= s;
}

JzMoments jz_moments(const TwoModeWave& w) {
  const int m = w.grid.m;
  JzMoments out;
  for (int i1 = 0; i1 < m; ++i1)
    for (int i2 = 0; i2 < m; ++i2) {
      double p = std::norm(w.amp[w.grid.index(i1, i2)]);
      if (p == 0) continue;
      double jz = 0.5 * ((w.n1c + w.grid.rel_n(i1)) - (w.n2c + w.grid.rel_n(i2)));
      out.mean += p * jz;
      out.second += p * jz * jz;
    }
  return out;
}

double mode_mean(const TwoModeWave& w, int mode) {
  const int m = w.grid.m;
  double s = 0;
  for (int i1 = 0; i1 < m; ++i1)
    for (int i2 = 0; i2 < m; ++i2) {
      double p = std::norm(w.amp[w.grid.index(i1, i2)]);
      s += p * (mode == 1 ? w.n1c + w.grid.rel_n(i1) : w.n2c + w.grid.rel_n(i2));
    }
  return s;
}

double n1n2_mean(const TwoModeWave& w) {
  const int m = w.grid.m;
  double s = 0;
  for (int i1 = 0; i1 < m; ++i1)
    for (int i2 = 0; i2 < m; ++i2) {
      double p = std::norm(w.amp[w.grid.index(i1, i2)]);
      s += p * double(w.n1c + w.grid.rel_n(i1)) * double(w.n2c + w.grid.rel_n(i2));
    }
  return s;
}

SwapSpectrum swap_spectrum(const TwoModeWave& w) {
  if (w.n1c != w.n2c)
    throw std::invalid_argument("swap_spectrum: equal occupation offsets required");
  const int m = w.grid.m;
  SwapSpectrum sp;
  sp.m = m;
  sp.s.assign(2 * m - 1, cxd(0, 0));
  for (int i1 = 0; i1 < m; ++i1)
    for (int i2 = 0; i2 < m; ++i2) {
      int k = w.grid.rel_n(i1) - w.grid.rel_n(i2);
      sp.s[k + m - 1] += std::conj(w.amp[w.grid.index(i1, i2)]) * w.amp[w.grid.index(i2, i1)];
    }
  return sp;
}

cxd SwapSpectrum::parity(double theta) const {
  cxd out(0, 0);
  for (int k = -(m - 1); k <= m - 1; ++k) out += s[k + m - 1] * std::exp(iu * (theta * k));
  return out;
}

cxd SwapSpectrum::dparity(double theta) const {
  cxd out(0, 0);
  for (int k = -(m - 1); k <= m - 1; ++k)
    out += s[k + m - 1] * (iu * double(k)) * std::exp(iu * (theta * k));
  return out;
}

cxd SwapSpectrum::ddparity(double theta) const {
  cxd out(0, 0);
  for (int k = -(m - 1); k <= m - 1; ++k)
    out += s[k + m - 1] * (-double(k) * k) * std::exp(iu * (theta * k));
  return out;
}

cxd parity_swap_expectation(const TwoModeWave& w, double theta) {
  double n2 = w.norm2();
  if (std::abs(n2 - 1.0) > 1e-8)
    throw std::invalid_argument("parity_swap_expectation: state not normalized");
  return swap_spectrum(w).parity(theta);
}

}  // namespace floqsens::ops
