#pragma once

#include <map>
#include <optional>

#include "floqsens/opspace.hpp"

namespace floqsens::floquet {

using ops::PhaseGrid;

// Reduced integers (p, q) with w1/w2 = p/q. T_com = p T_1 = q T_2.
struct Commensurability {
  long p = 1, q = 1;
};
// Continued-fraction rational approximation; throws if no rational with
// denominator <= max_den matches within rel_tol. The denominator bound keeps
// T_com (and the stroboscopic simulation cost) physically reasonable.
Commensurability commensurate(double w1, double w2, double rel_tol = 1e-9, long max_den = 1000);

// H(t) = H0 + H1o sin(w1 t + phi1) + H1e cos(w1 t + phi1)
//           + H2o sin(w2 t + phi2) + H2e cos(w2 t + phi2)
struct TwoToneModel {
  Mat h0, h1o, h1e, h2o, h2e;
  double omega1 = 1.0, omega2 = 1.0;
  Commensurability com;

  int dim() const { return static_cast<int>(h0.rows()); }
  double t_com() const { return 2.0 * pi * com.p / omega1; }
  double omega_com() const { return 2.0 * pi / t_com(); }
  Mat hamiltonian(double t, double phi1, double phi2) const;
  // dH_j/dt at time t (phases included), j = 1 or 2.
  Mat drive_rate(int j, double t, double phi1, double phi2) const;
  void validate() const;  // Hermiticity, shared dimension, commensurability
};

TwoToneModel make_two_tone(Mat h0, Mat h1o, Mat h1e, Mat h2o, Mat h2e, double w1, double w2);

// Gallery: circular, polarization, zeeman, specific, qutrit.
struct ModelInfo {
  std::string name;
  std::string anchor;  // short note on the model family
  std::vector<std::string> parameters;
};
std::vector<ModelInfo> model_catalog();
TwoToneModel model_library(const std::string& name, const std::map<std::string, double>& params);

// Time-ordered propagator over [0, duration], midpoint-sampled exact
// exponentials (second order, unitary by construction).
Mat propagate(const TwoToneModel& model, double phi1, double phi2, double duration,
              int steps_per_tcom = 2000);

// ---------------------------------------------------------------------------
// Quasienergy spectrum over the phase grid. Bands are continuity-tracked by
// eigenvector overlap; folded energies live in [-w_com/2, w_com/2) and
// derivatives use the minimal-image branch along tracked bands.
// ---------------------------------------------------------------------------
struct FloquetSpectrum {
  PhaseGrid grid{128};
  int d = 2;
  double omega_com = 1.0, t_com = 2.0 * pi;
  double omega1 = 1.0, omega2 = 1.0;
  std::vector<double> eps;     // folded, tracked order [idx*d + n]
  std::vector<cxd> vecs;       // [idx*d*d], column n contiguous: vecs[idx*d*d + n*d + row]
  std::vector<double> deps1;   // d eps_n / d phi1, tracked unfolded differences
  std::vector<double> deps2;
  std::vector<double> quality; // per-point worst neighbor overlap
  bool tracking_ambiguous = false;  // some max overlap < 0.5 (true degeneracy)

  double energy(long idx, int n) const { return eps[idx * d + n]; }
  Eigen::Map<const Mat> basis(long idx) const {
    return Eigen::Map<const Mat>(vecs.data() + idx * d * d, d, d);
  }
  Vec band_vector(long idx, int n) const;
  // Per-point power operator P_j(phi) = sum_n (d eps_n / d phi_j) |n><n|.
  Mat power_matrix(long idx, int j) const;
};

FloquetSpectrum quasienergies(const TwoToneModel& model, const PhaseGrid& grid,
                              int steps_per_tcom = 2000, int threads = 0);

// Derived qubit states |P>, |-P> of the per-point power operator.
struct PowerStates {
  Vec plus, minus;
  double value = 0;  // P >= 0
};
PowerStates power_states(const FloquetSpectrum& s, long idx, int j);

// Diagnostics used by the identity checks: per-point |tr P_j| and
// || w1 P_1 + w2 P_2 ||_max over the grid.
struct PowerIdentity {
  double max_trace = 0;
  double max_energy_conservation = 0;
};
PowerIdentity power_identity(const FloquetSpectrum& s);

// Spectrum CSV export: phi1, phi2, band, eps_folded, deps_dphi1, deps_dphi2.
void write_spectrum_csv(const FloquetSpectrum& s, const std::string& path);

// ---------------------------------------------------------------------------
// Cumulative work done by each drive on a trajectory.
// E_j(t) = int_0^t <psi|dH_j/dtau|psi> dtau, midpoint scheme shared with
// propagate(); at stroboscopic T the average power approaches
// w_j <psi(0)| P_j |psi(0)>.
// ---------------------------------------------------------------------------
struct EnergyTrace {
  std::vector<double> t;
  std::vector<double> e1, e2;
  double avg_power(int j, size_t k) const {
    return (j == 1 ? e1[k] : e2[k]) / t[k];
  }
};
EnergyTrace energy_transfer_trace(const TwoToneModel& model, double phi1, double phi2,
                                  const Vec& psi0, double horizon, int steps_per_tcom = 2000,
                                  int sample_stride = 0);

// Single midpoint-exponential step helper shared with the channels module.
Mat hermitian_exp(const Mat& h, double dt);  // exp(-i h dt), exact for d <= 4 via eigensolve

}  // namespace floqsens::floquet
