#pragma once

#include "floqsens/floquet.hpp"

namespace floqsens::lattice {

using floquet::FloquetSpectrum;
using ops::PhaseGrid;
using ops::TwoModeWave;

// ---------------------------------------------------------------------------
// Initial field distribution of the drives on the discrete Brillouin zone.
// Discrete amplitudes g_k are stored with sum |g_k|^2 = 1; the continuum
// weight is |f|^2 = |g|^2 / cell_area.
// ---------------------------------------------------------------------------
struct FieldDistribution {
  enum class Kind { CoherentDelta, CoherentWavepacket, FockUniform, Custom };
  Kind kind = Kind::FockUniform;
  PhaseGrid grid{128};
  std::vector<cxd> amp;  // [i1*m + i2], sum |amp|^2 = 1
  int n1c = 0, n2c = 0;  // reference occupations (offsets of the number lattice)
  double phi10 = 0, phi20 = 0;

  double weight(long idx) const { return std::norm(amp[idx]) / grid.cell_area(); }
  void check_normalized(double tol = 1e-10) const;
};

// |f|^2 = 1/4pi^2 (Fock-state input).
FieldDistribution fock_uniform(const PhaseGrid& grid, int n1c, int n2c);
// One grid cell of weight 1: the delta idealization used for band quadratures.
FieldDistribution coherent_delta(const PhaseGrid& grid, double phi10, double phi20, int n1c,
                                 int n2c);
// Product of per-mode coherent phase wavepackets (Poisson amplitudes around
// n_jc with drive phases phi_j0); the finite-width representation used for
// lattice dynamics with coherent inputs.
FieldDistribution coherent_wavepacket(const PhaseGrid& grid, int n1c, int n2c, double phi10,
                                      double phi20);
FieldDistribution custom_field(const PhaseGrid& grid, std::vector<cxd> amp, int n1c, int n2c);

// ---------------------------------------------------------------------------
// Qudit (x) phase-grid amplitudes, the lattice-model state in the interaction
// picture. Flattened as [lambda * m*m + i1*m + i2].
// ---------------------------------------------------------------------------
struct LatticeState {
  PhaseGrid grid{128};
  int d = 2;
  std::vector<cxd> amp;
  int n1c = 0, n2c = 0;

  double norm2() const;
  cxd& at(int lambda, long idx) { return amp[static_cast<size_t>(lambda) * grid.num_points() + idx]; }
  const cxd& at(int lambda, long idx) const {
    return amp[static_cast<size_t>(lambda) * grid.num_points() + idx];
  }
};

LatticeState initial_lattice_state(const FieldDistribution& f, const Vec& qudit);

// ---------------------------------------------------------------------------
// Functional power operator P_j[f] = int |f|^2 P_j(phi) with its eigensplit.
// ---------------------------------------------------------------------------
struct FunctionalPowerOperator {
  int drive = 1;
  Mat matrix;
  RVec eigvals;           // ascending
  Mat eigvecs;            // columns matched to eigvals
  std::vector<int> w_plus, w_minus;  // strictly positive / the rest
  bool zero_power = false;           // all |eigenvalues| below tolerance

  int free_phase_count() const {
    return static_cast<int>(w_plus.size() + w_minus.size()) - 1;
  }
};

FunctionalPowerOperator functional_power(const FloquetSpectrum& s, const FieldDistribution& f,
                                         int drive, double zero_tol = 1e-9);

struct ZeroPowerError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Equal-weight superposition over the W+ then W- eigenvectors; the first W+
// phase is fixed to zero and `betas` supplies the remaining D angles.
Vec ancilla_state(const FunctionalPowerOperator& p, const std::vector<double>& betas);

// Stroboscopic evolution: psi(phi, k T_com) from the cached per-point
// eigendecomposition of U_phi(T_com).
LatticeState evolve_lattice(const FloquetSpectrum& s, const FieldDistribution& f,
                            const Vec& qudit, long k_strob);

// Wavefunction profile at intermediate t (stepped propagator, plotting only).
LatticeState evolve_lattice_continuous(const floquet::TwoToneModel& model,
                                       const FieldDistribution& f, const Vec& qudit, double t,
                                       int steps_per_tcom = 2000, int threads = 0);

// Project the qudit factor of an evolved state onto the ancilla.
struct PesResult {
  TwoModeWave state;      // normalized two-mode amplitudes (number basis)
  double success = 0;     // squared norm of the projected branch
  int outcome = +1;       // +1: |b,+>, -1: complementary qubit projection
};
PesResult project_pes(const LatticeState& state, const Vec& ancilla, int outcome = +1);

// Fast path for repeated PES generation from one spectrum: amplitudes
// A(phi) = f(phi) sum_n |<n|s>|^2 e^{-i eps_n k T_com}.
TwoModeWave pes_at(const FloquetSpectrum& s, const FieldDistribution& f, const Vec& ancilla,
                   long k_strob, double* success = nullptr);

// Trace out both bosonic indices and return the Uhlmann fidelity of the
// reduced qudit state against the pure reference.
double reduced_ancilla_fidelity(const LatticeState& state, const Vec& reference);
Mat reduced_ancilla_density(const LatticeState& state);

// Mode-2 marginal occupation distribution (profile plots / CSV export).
std::vector<double> mode2_profile(const TwoModeWave& w);

}  // namespace floqsens::lattice
