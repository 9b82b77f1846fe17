#include "floqsens/lattice.hpp"

#include <cmath>

namespace floqsens::lattice {

void FieldDistribution::check_normalized(double tol) const {
  double s = 0;
  for (const cxd& a : amp) s += std::norm(a);
  if (std::abs(s - 1.0) > tol)
    throw std::invalid_argument("FieldDistribution: weights do not integrate to 1");
}

FieldDistribution fock_uniform(const PhaseGrid& grid, int n1c, int n2c) {
  FieldDistribution f;
  f.kind = FieldDistribution::Kind::FockUniform;
  f.grid = grid;
  f.n1c = n1c;
  f.n2c = n2c;
  f.amp.assign(grid.num_points(), cxd(1.0 / grid.m, 0));
  return f;
}

FieldDistribution coherent_delta(const PhaseGrid& grid, double phi10, double phi20, int n1c,
                                 int n2c) {
  FieldDistribution f;
  f.kind = FieldDistribution::Kind::CoherentDelta;
  f.grid = grid;
  f.n1c = n1c;
  f.n2c = n2c;
  f.phi10 = phi10;
  f.phi20 = phi20;
  f.amp.assign(grid.num_points(), cxd(0, 0));
  auto nearest = [&](double phi) {
    double x = phi / grid.spacing();
    return grid.wrap(static_cast<int>(std::lround(x)));
  };
  f.amp[grid.index(nearest(phi10), nearest(phi20))] = cxd(1, 0);
  return f;
}

namespace {

// Per-mode coherent phase amplitudes relative to the reference occupation:
// f(phi_k) ~ sum_r c_{nc+r} e^{-i phi_k r}, c_n the Poisson amplitudes of
// |alpha| = sqrt(nc) with drive phase phi0.
std::vector<cxd> coherent_mode_amp(int nc, double phi0, int m) {
  std::vector<cxd> c(m, cxd(0, 0));
  for (int i = 0; i < m; ++i) {
    int r = i < m / 2 ? i : i - m;
    long n = nc + r;
    if (n < 0) continue;
    // log of Poisson amplitude sqrt(e^-nc nc^n / n!)
    double lg = -0.5 * nc + 0.5 * n * std::log(double(nc)) - 0.5 * std::lgamma(double(n) + 1);
    c[i] = std::exp(lg) * std::exp(iu * (phi0 * r));
  }
  std::vector<cxd> f(m, cxd(0, 0));
  for (int k = 0; k < m; ++k) {
    double phi = 2.0 * pi * k / m;
    cxd s(0, 0);
    for (int i = 0; i < m; ++i) {
      int r = i < m / 2 ? i : i - m;
      s += c[i] * std::exp(-iu * (phi * r));
    }
    f[k] = s;
  }
  double n2 = 0;
  for (const cxd& a : f) n2 += std::norm(a);
  for (cxd& a : f) a /= std::sqrt(n2);
  return f;
}

}  // namespace

FieldDistribution coherent_wavepacket(const PhaseGrid& grid, int n1c, int n2c, double phi10,
                                      double phi20) {
  if (n1c < 1 || n2c < 1)
    throw std::invalid_argument("coherent_wavepacket: mean occupations must be >= 1");
  FieldDistribution f;
  f.kind = FieldDistribution::Kind::CoherentWavepacket;
  f.grid = grid;
  f.n1c = n1c;
  f.n2c = n2c;
  f.phi10 = phi10;
  f.phi20 = phi20;
  std::vector<cxd> f1 = coherent_mode_amp(n1c, phi10, grid.m);
  std::vector<cxd> f2 = coherent_mode_amp(n2c, phi20, grid.m);
  f.amp.resize(grid.num_points());
  for (int i1 = 0; i1 < grid.m; ++i1)
    for (int i2 = 0; i2 < grid.m; ++i2) f.amp[grid.index(i1, i2)] = f1[i1] * f2[i2];
  return f;
}

FieldDistribution custom_field(const PhaseGrid& grid, std::vector<cxd> amp, int n1c, int n2c) {
  if (amp.size() != static_cast<size_t>(grid.num_points()))
    throw std::invalid_argument("custom_field: grid size mismatch");
  FieldDistribution f;
  f.kind = FieldDistribution::Kind::Custom;
  f.grid = grid;
  f.n1c = n1c;
  f.n2c = n2c;
  f.amp = std::move(amp);
  f.check_normalized(1e-8);
  return f;
}

double LatticeState::norm2() const {
  double s = 0;
  for (const cxd& a : amp) s += std::norm(a);
  return s;
}

LatticeState initial_lattice_state(const FieldDistribution& f, const Vec& qudit) {
  if (std::abs(qudit.norm() - 1.0) > 1e-9)
    throw std::invalid_argument("initial_lattice_state: qudit state not normalized");
  LatticeState st;
  st.grid = f.grid;
  st.d = static_cast<int>(qudit.size());
  st.n1c = f.n1c;
  st.n2c = f.n2c;
  st.amp.resize(static_cast<size_t>(st.d) * f.grid.num_points());
  for (int l = 0; l < st.d; ++l)
    for (long idx = 0; idx < f.grid.num_points(); ++idx) st.at(l, idx) = qudit(l) * f.amp[idx];
  return st;
}

FunctionalPowerOperator functional_power(const FloquetSpectrum& s, const FieldDistribution& f,
                                         int drive, double zero_tol) {
  if (s.grid.m != f.grid.m)
    throw std::invalid_argument("functional_power: spectrum and field must share a grid");
  if (drive != 1 && drive != 2) throw std::invalid_argument("functional_power: drive is 1 or 2");
  const int d = s.d;
  const std::vector<double>& de = (drive == 1) ? s.deps1 : s.deps2;
  Mat p = Mat::Zero(d, d);
  // midpoint-rule quadrature: discrete weights |g|^2 already integrate the cell
  for (long idx = 0; idx < s.grid.num_points(); ++idx) {
    double w = std::norm(f.amp[idx]);
    if (w == 0) continue;
    for (int n = 0; n < d; ++n) {
      Vec v = s.band_vector(idx, n);
      p += (w * de[idx * d + n]) * (v * v.adjoint());
    }
  }
  p = 0.5 * (p + p.adjoint().eval());
  FunctionalPowerOperator out;
  out.drive = drive;
  out.matrix = p;
  Eigen::SelfAdjointEigenSolver<Mat> es(p);
  out.eigvals = es.eigenvalues();
  out.eigvecs = es.eigenvectors();
  out.zero_power = out.eigvals.cwiseAbs().maxCoeff() < zero_tol * s.omega_com;
  for (int n = 0; n < d; ++n) {
    if (out.eigvals(n) > zero_tol * s.omega_com)
      out.w_plus.push_back(n);
    else
      out.w_minus.push_back(n);
  }
  return out;
}

Vec ancilla_state(const FunctionalPowerOperator& p, const std::vector<double>& betas) {
  if (p.zero_power)
    throw ZeroPowerError("ancilla_state: zero functional power, no preferred eigensplit");
  if (p.w_plus.empty() || p.w_minus.empty())
    throw ZeroPowerError("ancilla_state: empty W+ or W- eigenvalue set");
  const int d = static_cast<int>(p.eigvals.size());
  const int nfree = p.free_phase_count();
  if (static_cast<int>(betas.size()) != nfree)
    throw std::invalid_argument("ancilla_state: expected " + std::to_string(nfree) + " phases");
  Vec s = Vec::Zero(d);
  int bi = 0;
  for (size_t k = 0; k < p.w_plus.size(); ++k) {
    cxd ph = (k + 1 == p.w_plus.size()) ? cxd(1, 0) : std::exp(iu * betas[bi++]);
    s += ph * p.eigvecs.col(p.w_plus[k]);
  }
  for (size_t k = 0; k < p.w_minus.size(); ++k) s += std::exp(iu * betas[bi++]) * p.eigvecs.col(p.w_minus[k]);
  s /= std::sqrt(double(d));
  return s;
}

LatticeState evolve_lattice(const FloquetSpectrum& s, const FieldDistribution& f,
                            const Vec& qudit, long k_strob) {
  if (k_strob < 0) throw std::invalid_argument("evolve_lattice: k >= 0 required");
  if (qudit.size() != s.d) throw std::invalid_argument("evolve_lattice: qudit dimension mismatch");
  LatticeState st = initial_lattice_state(f, qudit);
  if (k_strob == 0) return st;
  const double T = k_strob * s.t_com;
  const int d = s.d;
  for (long idx = 0; idx < s.grid.num_points(); ++idx) {
    if (std::norm(f.amp[idx]) == 0) continue;
    Mat v = s.basis(idx);
    Vec u = v.adjoint() * qudit;
    for (int n = 0; n < d; ++n) u(n) *= std::exp(-iu * (s.eps[idx * d + n] * T));
    Vec psi = v * u;
    for (int l = 0; l < d; ++l) st.at(l, idx) = psi(l) * f.amp[idx];
  }
  return st;
}

LatticeState evolve_lattice_continuous(const floquet::TwoToneModel& model,
                                       const FieldDistribution& f, const Vec& qudit, double t,
                                       int steps_per_tcom, int threads) {
  if (threads <= 0) threads = default_threads();
  LatticeState st = initial_lattice_state(f, qudit);
  if (t == 0) return st;
  const int d = st.d;
  parallel_for(f.grid.num_points(), threads, [&](long idx) {
    if (std::norm(f.amp[idx]) < 1e-30) return;
    int i1 = static_cast<int>(idx / f.grid.m), i2 = static_cast<int>(idx % f.grid.m);
    Mat u = floquet::propagate(model, f.grid.point(i1), f.grid.point(i2), t, steps_per_tcom);
    Vec psi = u * qudit;
    for (int l = 0; l < d; ++l) st.at(l, idx) = psi(l) * f.amp[idx];
  });
  return st;
}

PesResult project_pes(const LatticeState& state, const Vec& ancilla, int outcome) {
  if (state.d != ancilla.size())
    throw std::invalid_argument("project_pes: ancilla dimension mismatch");
  if (outcome != 1 && outcome != -1) throw std::invalid_argument("project_pes: outcome is +-1");
  const long np = state.grid.num_points();
  std::vector<cxd> proj(np, cxd(0, 0));
  if (outcome == +1 || state.d == 2) {
    Vec s = ancilla;
    if (outcome == -1) {
      // complementary qubit projection: the orthogonal state
      s = Vec(2);
      s(0) = -std::conj(ancilla(1));
      s(1) = std::conj(ancilla(0));
    }
    for (long idx = 0; idx < np; ++idx) {
      cxd a(0, 0);
      for (int l = 0; l < state.d; ++l) a += std::conj(s(l)) * state.at(l, idx);
      proj[idx] = a;
    }
  } else {
    throw std::invalid_argument("project_pes: complementary projection only defined for qubits");
  }
  double n2 = 0;
  for (const cxd& a : proj) n2 += std::norm(a);
  if (n2 < 1e-12) throw std::runtime_error("project_pes: projection annihilates the state");
  double inv = 1.0 / std::sqrt(n2);
  for (cxd& a : proj) a *= inv;
  PesResult out;
  out.success = n2;
  out.outcome = outcome;
  out.state.grid = state.grid;
  out.state.n1c = state.n1c;
  out.state.n2c = state.n2c;
  ops::phase_to_number(proj, out.state.amp, state.grid.m);
  return out;
}

TwoModeWave pes_at(const FloquetSpectrum& s, const FieldDistribution& f, const Vec& ancilla,
                   long k_strob, double* success) {
  const int d = s.d;
  const double T = k_strob * s.t_com;
  std::vector<cxd> proj(s.grid.num_points(), cxd(0, 0));
  for (long idx = 0; idx < s.grid.num_points(); ++idx) {
    if (std::norm(f.amp[idx]) == 0) continue;
    Mat v = s.basis(idx);
    Vec u = v.adjoint() * ancilla;
    cxd a(0, 0);
    for (int n = 0; n < d; ++n) a += std::norm(u(n)) * std::exp(-iu * (s.eps[idx * d + n] * T));
    proj[idx] = a * f.amp[idx];
  }
  double n2 = 0;
  for (const cxd& a : proj) n2 += std::norm(a);
  if (success) *success = n2;
  if (n2 < 1e-12) throw std::runtime_error("pes_at: projection annihilates the state");
  double inv = 1.0 / std::sqrt(n2);
  for (cxd& a : proj) a *= inv;
  TwoModeWave w;
  w.grid = s.grid;
  w.n1c = f.n1c;
  w.n2c = f.n2c;
  ops::phase_to_number(proj, w.amp, s.grid.m);
  return w;
}

Mat reduced_ancilla_density(const LatticeState& state) {
  Mat rho = Mat::Zero(state.d, state.d);
  for (long idx = 0; idx < state.grid.num_points(); ++idx)
    for (int a = 0; a < state.d; ++a)
      for (int b = 0; b < state.d; ++b) rho(a, b) += state.at(a, idx) * std::conj(state.at(b, idx));
  return rho;
}

double reduced_ancilla_fidelity(const LatticeState& state, const Vec& reference) {
  // Uhlmann fidelity against a pure reference reduces to <ref|rho|ref>
  Mat rho = reduced_ancilla_density(state);
  return (reference.adjoint() * rho * reference)(0).real();
}

std::vector<double> mode2_profile(const TwoModeWave& w) {
  const int m = w.grid.m;
  std::vector<double> p(m, 0.0);
  for (int i1 = 0; i1 < m; ++i1)
    for (int i2 = 0; i2 < m; ++i2) p[i2] += std::norm(w.amp[w.grid.index(i1, i2)]);
  return p;
}

}  // namespace floqsens::lattice
