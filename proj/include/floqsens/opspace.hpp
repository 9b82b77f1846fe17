#pragma once

#include <Eigen/SparseCore>

#include "floqsens/common.hpp"

namespace floqsens::ops {

using SpMat = Eigen::SparseMatrix<cxd>;

// ---------------------------------------------------------------------------
// Qudit operators (dense, d small)
// ---------------------------------------------------------------------------

Mat sigma_x();
Mat sigma_y();
Mat sigma_z();
// Spin-z for a d-level system: diag(s, s-1, ..., -s) with s = (d-1)/2.
Mat spin_z(int d);
Mat projector(int level, int d);

bool is_hermitian(const Mat& a, double tol = 1e-12);

// ---------------------------------------------------------------------------
// Uniform grid over the phase Brillouin zone [0,2pi)^2, m points per axis.
// m must be a power of two so phase and number lattices pair up under an
// exact DFT.
// ---------------------------------------------------------------------------
struct PhaseGrid {
  int m = 128;

  explicit PhaseGrid(int m_pts = 128);

  double spacing() const { return 2.0 * pi / m; }
  double cell_area() const { return spacing() * spacing(); }
  double point(int k) const { return spacing() * k; }
  long num_points() const { return static_cast<long>(m) * m; }
  long index(int i1, int i2) const { return static_cast<long>(i1) * m + i2; }
  int wrap(int i) const { return ((i % m) + m) % m; }
  // Relative occupation carried by lattice index i (DFT ordering).
  int rel_n(int i) const { return i < m / 2 ? i : i - m; }
};

// ---------------------------------------------------------------------------
// Two-mode Fock-space operators on the (n_max+1)^2 number basis,
// index (n1, n2) -> n1*(n_max+1)+n2.
// ---------------------------------------------------------------------------
struct TwoModeOperator {
  int n_max = 0;
  SpMat mat;

  long dim() const { return mat.rows(); }
};

inline long fock_index(int n1, int n2, int n_max) {
  return static_cast<long>(n1) * (n_max + 1) + n2;
}

// Schwinger angular momentum: Jx = (a1+ a2 + a2+ a1)/2, Jy = i(a1+ a2 - a2+ a1)/2,
// Jz = (n1 - n2)/2. All block-diagonal in the total photon number.
TwoModeOperator build_angular_momentum(char kind, int n_max);
TwoModeOperator swap_operator(int n_max);
TwoModeOperator number_operator(int mode, int n_max);
// Parity of the second mode, (-1)^{n2}.
TwoModeOperator mode2_parity(int n_max);
// 50-50 beam splitter exp(-i Jx pi/2) restricted to the truncated space.
Mat mzi_decoder(int n_max);

// ---------------------------------------------------------------------------
// Two-mode amplitudes over the relative number lattice, the DFT dual of a
// PhaseGrid. Absolute occupations are n_j = offset_j + rel_n(i_j); the lattice
// approximation permits negative absolute occupations (tracked, not an error).
// ---------------------------------------------------------------------------
struct TwoModeWave {
  PhaseGrid grid{128};
  std::vector<cxd> amp;  // [i1*m + i2]
  int n1c = 0, n2c = 0;  // occupation offsets

  double norm2() const;
  bool has_negative_occupation() const;
};

// DFT conventions follow |phi> = sum_n e^{i phi n} |n>, i.e. a+a -> -i d/dphi.
// phase amplitudes g_k (sum |g|^2 = 1)  ->  psi(n) = (1/m) sum_k g_k e^{+i phi_k . n}.
// Both directions are unitary on the discrete grid.
void phase_to_number(const std::vector<cxd>& phase_amp, std::vector<cxd>& number_amp, int m);
void number_to_phase(const std::vector<cxd>& number_amp, std::vector<cxd>& phase_amp, int m);

// <Jz>, <Jz^2> with absolute occupations.
struct JzMoments {
  double mean = 0, second = 0;
  double variance() const { return second - mean * mean; }
};
JzMoments jz_moments(const TwoModeWave& w);
double mode_mean(const TwoModeWave& w, int mode);
// <n1 n2> for the witness.
double n1n2_mean(const TwoModeWave& w);

// Exact parity-swap expectation <e^{2 i Jz theta} S> = sum over (n1,n2) of
// conj(psi(n1,n2)) e^{i theta (n1-n2)} psi(n2,n1). Requires n1c == n2c so the
// swap maps the relative window onto itself.
cxd parity_swap_expectation(const TwoModeWave& w, double theta);

// Relative-number-difference spectrum S_k = sum_{n1-n2=k} conj(psi(n1,n2)) psi(n2,n1);
// parity and its exact theta-derivatives are trigonometric sums over S_k.
struct SwapSpectrum {
  std::vector<cxd> s;  // index k + (m-1), k in [-(m-1), m-1]
  int m = 0;
  cxd parity(double theta) const;
  cxd dparity(double theta) const;   // exact d/dtheta, inserts i(n1-n2)
  cxd ddparity(double theta) const;  // exact second derivative
};
SwapSpectrum swap_spectrum(const TwoModeWave& w);

}  // namespace floqsens::ops
