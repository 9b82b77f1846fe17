#pragma once

#include <optional>
#include <random>

#include "floqsens/readout.hpp"

namespace floqsens::channels {

using floquet::TwoToneModel;

// ---------------------------------------------------------------------------
// Photon loss on mode 1: Kraus sum with transmissivity eta in [0,1].
// States and densities live on the truncated two-mode basis (n_max+1)^2.
// ---------------------------------------------------------------------------
Mat lossy_channel(const Vec& pure, double eta, int n_max);
Mat lossy_channel(const Mat& rho, double eta, int n_max);
// sum_j K_j^dag K_j on the truncated space (completeness check).
Mat kraus_completeness(double eta, int n_max);

struct LossPoint {
  double eta = 1;
  double qfi = 0;
  double dtheta_qfi = 0;
  double dtheta_parity = 0;
};
std::vector<LossPoint> loss_sweep(const Vec& state, int n_max, const std::vector<double>& etas,
                                  int parity_samples = 512);

// ---------------------------------------------------------------------------
// Bayesian estimation with a prior phase distribution.
// ---------------------------------------------------------------------------
struct PriorModel {
  std::vector<double> theta;    // quadrature nodes
  std::vector<double> weight;   // normalized: sum w = 1
  double fisher = 0;            // prior Fisher information F0
  double second_moment = 0;     // int P theta^2

  static PriorModel gaussian(double dtheta, int nodes = 64);
  static PriorModel tabulated(std::vector<double> theta, std::vector<double> pdf);
};

struct BayesResult {
  double posterior_var = 0;    // minimal posterior variance under the optimal S
  double dtheta_m = 0;         // 1/dtheta_m^2 = 1/posterior_var - F0; inf when no gain
};
// Generator is Jz on the truncated two-mode basis (diagonal).
BayesResult bayesian_improvement(const Mat& rho, const PriorModel& prior, int n_max);
BayesResult bayesian_improvement(const Vec& pure, const PriorModel& prior, int n_max);

// ---------------------------------------------------------------------------
// Stochastic noise on the classical trajectory.
// ---------------------------------------------------------------------------
struct NoiseSpec {
  enum class Kind { Dephasing, Frequency, Detuning };
  Kind kind = Kind::Dephasing;
  double strength = 0;   // delta_eta or delta_omega (energy units)
  double tau_over_tcom = 1e-3;
  Mat axis;              // dephasing axis operator
  int drive = 2;         // frequency noise acts on this drive's phase
  std::uint64_t seed = 1;
};

struct NoisyTrace {
  std::vector<double> t;
  std::vector<double> e1_mean, e2_mean;
  std::vector<double> e1_sd, e2_sd;    // across trajectories
  std::vector<double> meander_sq;      // <DeltaPhi^2>(t), frequency noise only
};
NoisyTrace noisy_energy_transfer(const TwoToneModel& model, double phi1, double phi2,
                                 const Vec& psi0, const NoiseSpec& noise, int trajectories,
                                 double horizon, int samples = 256, int threads = 0);

// Time at which dE2/dt drops below `frac` of its initial (smoothed) slope.
double transfer_stop_time(const NoisyTrace& tr, double frac = 0.1);

// ---------------------------------------------------------------------------
// Deterministic detuning: lattice dynamics run at drive frequency w + dw while
// the ancilla is prepared for w; parity sensitivity per stroboscopic k.
// ---------------------------------------------------------------------------
struct DetunedSeries {
  std::vector<long> ks;
  std::vector<double> delta_theta;      // best over the theta grid (or fixed theta)
  double onset_k = 0;                   // first k where the detuned curve departs
};
DetunedSeries detuned_parity(const TwoToneModel& nominal, double delta_omega,
                             const lattice::FieldDistribution& f, const Vec& ancilla,
                             const std::vector<long>& ks, std::optional<double> theta,
                             const DetunedSeries* baseline = nullptr, double depart_factor = 2.0,
                             int steps_per_tcom = 2000, int threads = 0);

}  // namespace floqsens::channels
