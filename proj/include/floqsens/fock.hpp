#pragma once

#include "floqsens/floquet.hpp"
#include "floqsens/opspace.hpp"

namespace floqsens::fock {

// ---------------------------------------------------------------------------
// Amplitudes over qudit level x truncated two-mode occupations, flattened as
// [(lambda * (n_max+1) + n1) * (n_max+1) + n2].
// ---------------------------------------------------------------------------
struct FockState {
  int d = 2, n_max = 0;
  std::vector<cxd> amp;

  long dim() const { return static_cast<long>(d) * (n_max + 1) * (n_max + 1); }
  long index(int lambda, int n1, int n2) const {
    return (static_cast<long>(lambda) * (n_max + 1) + n1) * (n_max + 1) + n2;
  }
  double norm2() const;
  // population on the outer two shells n_j in {n_max-1, n_max}
  double boundary_population() const;
};

// ---------------------------------------------------------------------------
// Time-independent quantized-drives Hamiltonian: H0 + HB + per-photon
// couplings through (a_j +- a_j^dag). Per-photon operators are the classical
// drive amplitudes divided by sqrt(n_jc), so the lattice limit reproduces the
// classical model with renormalized couplings.
// ---------------------------------------------------------------------------
struct QuantizedModel {
  int d = 2, n_max = 0;
  int n1c = 0, n2c = 0;
  double omega1 = 1, omega2 = 1, t_com = 2 * pi;
  Mat h0, c1o, c1e, c2o, c2e;  // qudit blocks; c's are per-photon couplings

  long dim() const { return static_cast<long>(d) * (n_max + 1) * (n_max + 1); }
  // y = H x (dense stencil over the 3-d index space)
  void apply(const cxd* x, cxd* y) const;
  double energy_mean(const FockState& s) const;
  // crude spectral-radius bound used for Krylov sizing
  double norm_bound() const;
};

struct TruncationBreach : std::runtime_error {
  double at_time;
  TruncationBreach(const std::string& what, double t) : std::runtime_error(what), at_time(t) {}
};

QuantizedModel quantize(const floquet::TwoToneModel& model, int n1c, int n2c, int n_max);

// Default truncation margin: n_c + ceil(6 sqrt(n_c)) + 8.
int default_n_max(int n_c);

// Product input: qudit (x) per-mode coherent or Fock states.
enum class InputKind { Fock, Coherent };
FockState drive_input(InputKind kind, int n1c, int n2c, double phi10, double phi20, int n_max,
                      const Vec& qudit);

// Short-iterative Lanczos propagation of the time-independent H_q; per-step
// relative error <= tol. Boundary-shell population > 1e-6 raises
// TruncationBreach with the offending time.
struct EvolveOptions {
  double tol = 1e-8;
  double step = 0;      // default t_com / 50
  int max_krylov = 40;
  double breach_tol = 1e-6;
};
FockState evolve_fock(const QuantizedModel& qm, const FockState& psi0, double T,
                      const EvolveOptions& opt = {});

// Ancilla projection in the number basis.
struct PesFockResult {
  int n_max = 0;
  std::vector<cxd> amp;  // two-mode amplitudes [n1*(n_max+1)+n2], normalized
  double success = 0;
};
PesFockResult pes_fock(const FockState& state, const Vec& ancilla);

// Observables on two-mode (projected) amplitudes in absolute occupations.
struct TwoModeFockView {
  int n_max;
  const std::vector<cxd>& amp;
};
double jz_mean(const TwoModeFockView& v);
double jz_second(const TwoModeFockView& v);
double mode_mean(const TwoModeFockView& v, int mode);
double n1n2_mean(const TwoModeFockView& v);
cxd parity_swap_expectation(const TwoModeFockView& v, double theta);

// Difference spectrum S_k over absolute occupations (parity readout core).
ops::SwapSpectrum swap_spectrum_fock(const TwoModeFockView& v);

// Reduced qudit density matrix of a full Fock-space state.
Mat reduced_ancilla_density(const FockState& s);

// State snapshot CSV: lambda, n1, n2, re, im.
void write_state_csv(const FockState& s, const std::string& path, double min_weight = 1e-14);

}  // namespace floqsens::fock
