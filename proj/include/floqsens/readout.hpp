#pragma once

#include <optional>

#include "floqsens/lattice.hpp"

namespace floqsens::readout {

using floquet::FloquetSpectrum;
using lattice::FieldDistribution;
using ops::SwapSpectrum;
using ops::TwoModeWave;

// ---------------------------------------------------------------------------
// Parity expectation and classical Fisher information over a theta grid.
// theta here is theta_tilde = theta - pi/2; derivatives are exact (the
// i(n1-n2) insertion), never finite differences. Samples with |<Pi>| near 1
// carry the singular-denominator flag; where the derivative also vanishes the
// L'Hopital limit |Pi''| is recorded as the Fisher value at the flagged point.
// ---------------------------------------------------------------------------
struct ParityCurve {
  std::vector<double> theta;
  std::vector<cxd> parity;
  std::vector<cxd> dparity;
  std::vector<double> fisher;
  std::vector<double> delta_theta;  // 1/sqrt(F); capped at `dtheta_cap`
  std::vector<bool> flagged;
  double dtheta_cap = 1e6;

  // best (smallest) unflagged delta_theta; flagged-limit samples excluded
  double best_delta_theta() const;
  void write_csv(const std::string& path) const;
};

struct ParityOptions {
  int samples = 512;
  double singular_tol = 1e-8;   // flag when |<Pi>| > 1 - singular_tol
  double fisher_floor = 1e-12;  // below this, no information: delta_theta capped
};

ParityCurve parity_curve(const SwapSpectrum& sp, const std::vector<double>& thetas,
                         const ParityOptions& opt = {});
ParityCurve parity_curve(const TwoModeWave& w, int samples = 512);
// Mixed-state version: rho in the truncated two-mode number basis.
ParityCurve parity_curve_density(const Mat& rho, int n_max, int samples = 512);

// Fisher information at a single theta; at swap-symmetric points where
// <Pi> = 1 and <Pi>' = 0 this evaluates the limit |Pi''|.
double fisher_at(const SwapSpectrum& sp, double theta, const ParityOptions& opt = {});

// ---------------------------------------------------------------------------
// Fitted scaling exponent of delta_theta vs T.
// ---------------------------------------------------------------------------
struct ScalingFit {
  double exponent = 0;
  double r2 = 0;
  std::vector<long> ks;
  std::vector<double> delta_theta;
};

// theta = nullopt: optimal (min over the theta grid) per T.
ScalingFit sensitivity_scaling(const FloquetSpectrum& s, const FieldDistribution& f,
                               const Vec& ancilla, const std::vector<long>& ks,
                               std::optional<double> theta, const ParityOptions& opt = {});
ScalingFit fit_loglog(const std::vector<long>& ks, const std::vector<double>& dts);

// ---------------------------------------------------------------------------
// Characteristic-function classifier. Bands enter as 1-D unfolded samples
// eps_n(x) over one period of x = dphi (phi1 - phi2); internally rescaled to
// x_tilde = dphi / (sqrt2 w).
// ---------------------------------------------------------------------------
struct Band1D {
  int m = 0;                     // samples over [0, 2pi)
  int d = 2;
  double omega = 1;              // common drive frequency
  double omega_com = 1;
  std::vector<double> eps;       // folded, tracked: [k*d + n]
  std::vector<double> deps;      // d eps / d(dphi), tracked minimal-image
  double eps_at(double dphi, int n) const;   // periodic linear interpolation (unfolded locally)
  double deps_at(double dphi, int n) const;
  double ddeps_at(double dphi, int n) const; // centered difference of deps
};
// Extract the 1-D cut phi2 = 0 from a 2-D spectrum (valid because the
// quasienergies depend only on phi1/w1 - phi2/w2).
Band1D band_cut(const FloquetSpectrum& s);

enum class Verdict {
  DegenerateSensitive,    // HL class: flat critical point with d_theta G != 0
  NonDegenerate,          // SQL class
  Insensitive,            // no usable critical point / d_theta G = 0
  NoSubSql,               // analytic w1 != w2 verdict
};
std::string verdict_name(Verdict v);

struct CriticalPoint {
  double x0 = 0;          // in dphi units
  int n = 0, m_band = 0;  // band pair
  double g2 = 0;          // d^2 G / dx^2 at the root
  double gt = 0;          // d G / d theta at the root
  bool degenerate = false, sensitive = false, in_support = false;
};

struct CharacteristicProfile {
  Verdict verdict = Verdict::Insensitive;
  std::vector<CriticalPoint> points;
  bool degenerate_everywhere = false;  // symmetric-band case: max |G| < tol on support
  std::string note;
};

struct ClassifierOptions {
  double tol2 = 0;     // default 1e-3 * w_com^2 / (2pi)^2
  double tol_theta = 0;  // default 1e-6 * w_com
  int refine = 8;        // grid-refinement factor for root localization
};

// Support of f in dphi: intervals on [0, 2pi). For coherent deltas the
// support is the grid cell around phi10 - phi20.
struct Support {
  std::vector<std::pair<double, double>> intervals;  // [lo, hi) in dphi, may wrap
  bool contains(double dphi) const;
  static Support full();
  static Support cell(double dphi, double width);
};
Support field_support(const FieldDistribution& f, double weight_cut = 1e-6);

CharacteristicProfile classify_critical_points(const Band1D& bands, double theta,
                                               const Support& support,
                                               const ClassifierOptions& opt = {});
// Frequency gate: returns NoSubSql profile for w1 != w2.
CharacteristicProfile classify(const FloquetSpectrum& s, double theta, const Support& support,
                               const ClassifierOptions& opt = {});

}  // namespace floqsens::readout
