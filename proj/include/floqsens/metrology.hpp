#pragma once

#include "floqsens/lattice.hpp"

namespace floqsens::metrology {

using floquet::FloquetSpectrum;
using lattice::FieldDistribution;
using ops::TwoModeWave;

// F_q = 4 (<A^2> - <A>^2) for a pure probe state.
double qfi_pure(const Vec& psi, const ops::TwoModeOperator& generator);
// Specializations for the Jz generator (diagonal in the number basis).
double qfi_pure_jz(const TwoModeWave& w);
double qfi_pure_jz_fock(int n_max, const std::vector<cxd>& amp);

// Spectral two-sum formula for mixed probes; eigenvalues below -1e-10 are an
// error, smaller negatives are clamped and the spectrum renormalized.
double qfi_mixed(const Mat& rho, const Mat& generator);

// P^2[f] = 1/2 int |f|^2 [ (d_dphi eps_1)^2 + (d_dphi eps_2)^2 ] and the
// asymptotic QFI/T^2 window [P^2/2, 2 P^2]. Qubit ancillae only.
struct QfiBound {
  double p2 = 0;
  double lo() const { return 0.5 * p2; }
  double hi() const { return 2.0 * p2; }
};
QfiBound qfi_bound(const FloquetSpectrum& s, const FieldDistribution& f);

// Q[f] = int |f|^2 | d1 eps_1 * d2 eps_2 |, the path-entanglement bound.
double q_bound(const FloquetSpectrum& s, const FieldDistribution& f);

// K = -2 [ <n1 n2> - <n1><n2> ]; positive beyond 3x the quadrature-error
// estimate witnesses path entanglement.
struct Witness {
  double k = 0;
  double error = 0;  // grid-refinement error estimate supplied by the caller
  bool path_entangled = false;
};
Witness entanglement_witness(const TwoModeWave& w, double error_estimate = 0.0);

// QFI landscape over the ancilla phases (exhaustive grid scan, deterministic).
struct OptimizeConfig {
  int grid_points = 32;  // per free phase
  long k_strob = 10;
  bool refine = false;   // optional coordinate descent around the best node
  int refine_iters = 20;
  int threads = 0;
};
struct OptimizeResult {
  std::vector<double> best_betas;
  double best_qfi_per_t2 = 0;
  double min_qfi_per_t2 = 0;
  bool flat = false;              // landscape variation below tolerance (flat bands)
  std::vector<double> landscape;  // row-major over the beta grid
  int grid_points = 0;
  int free_phases = 0;
};
OptimizeResult optimize_ancilla_phases(const FloquetSpectrum& s, const FieldDistribution& f,
                                       const lattice::FunctionalPowerOperator& p,
                                       const OptimizeConfig& cfg);

// Reference two-mode states on the truncated basis with n_max = N.
Vec noon_state(int n_photons);
Vec twin_fock_state(int n_photons);

// Time series bundle exported by the qfi pipeline.
struct SensingReport {
  std::vector<double> t_over_tcom;
  std::vector<double> qfi, bound_lo, bound_hi, mean_jz, witness_k;
  double q_window = 0;
  std::string model, input;
  void write_csv(const std::string& path) const;
  void write_json(const std::string& path) const;
};

}  // namespace floqsens::metrology
