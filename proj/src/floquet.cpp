#include "floqsens/floquet.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace floqsens::floquet {

Commensurability commensurate(double w1, double w2, double rel_tol, long max_den) {
  if (w1 <= 0 || w2 <= 0) throw std::invalid_argument("commensurate: frequencies must be > 0");
  double x = w1 / w2;
  // Stern-Brocot / continued fractions
  long p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  double r = x;
  for (int it = 0; it < 64; ++it) {
    long a = static_cast<long>(std::floor(r));
    long p2 = a * p1 + p0, q2 = a * q1 + q0;
    if (q2 > max_den) break;
    p0 = p1; q0 = q1; p1 = p2; q1 = q2;
    if (std::abs(x - double(p1) / double(q1)) <= rel_tol * x) return {p1, q1};
    double frac = r - a;
    if (frac < 1e-15) break;
    r = 1.0 / frac;
  }
  if (std::abs(x - double(p1) / double(q1)) <= rel_tol * x) return {p1, q1};
  throw std::invalid_argument("commensurate: w1/w2 not rational within tolerance");
}

Mat TwoToneModel::hamiltonian(double t, double phi1, double phi2) const {
  double a1 = omega1 * t + phi1, a2 = omega2 * t + phi2;
  return h0 + std::sin(a1) * h1o + std::cos(a1) * h1e + std::sin(a2) * h2o + std::cos(a2) * h2e;
}

Mat TwoToneModel::drive_rate(int j, double t, double phi1, double phi2) const {
  if (j == 1) {
    double a = omega1 * t + phi1;
    return omega1 * (std::cos(a) * h1o - std::sin(a) * h1e);
  }
  double a = omega2 * t + phi2;
  return omega2 * (std::cos(a) * h2o - std::sin(a) * h2e);
}

void TwoToneModel::validate() const {
  const int d = dim();
  for (const Mat* m : {&h0, &h1o, &h1e, &h2o, &h2e}) {
    if (m->rows() != d || m->cols() != d)
      throw std::invalid_argument("TwoToneModel: all operators must share the qudit dimension");
    if (!ops::is_hermitian(*m))
      throw std::invalid_argument("TwoToneModel: operators must be Hermitian");
  }
  if (d < 2) throw std::invalid_argument("TwoToneModel: qudit dimension >= 2");
}

TwoToneModel make_two_tone(Mat h0, Mat h1o, Mat h1e, Mat h2o, Mat h2e, double w1, double w2) {
  TwoToneModel m;
  m.h0 = std::move(h0);
  m.h1o = std::move(h1o);
  m.h1e = std::move(h1e);
  m.h2o = std::move(h2o);
  m.h2e = std::move(h2e);
  m.omega1 = w1;
  m.omega2 = w2;
  m.com = commensurate(w1, w2);
  m.validate();
  return m;
}

std::vector<ModelInfo> model_catalog() {
  return {
      {"circular", "two identical circularly-polarized drives on a qubit",
       {"omega0", "omega", "amplitude"}},
      {"polarization", "circularly-polarized drives with opposite chirality",
       {"omega0", "omega", "amplitude"}},
      {"zeeman", "two-tone oscillating Zeeman field along z",
       {"g", "b0", "b1", "b2", "omega1", "omega2"}},
      {"specific", "driven qubit with asymmetric two-tone couplings",
       {"omega0", "omega", "amplitude"}},
      {"qutrit", "driven three-level ladder with shared-transition couplings",
       {"omega12", "omega23", "omega", "amplitude"}},
  };
}

namespace {

double get_param(const std::map<std::string, double>& p, const std::string& key) {
  auto it = p.find(key);
  if (it == p.end()) throw std::invalid_argument("model_library: missing parameter '" + key + "'");
  return it->second;
}

double get_param(const std::map<std::string, double>& p, const std::string& key, double dflt) {
  auto it = p.find(key);
  return it == p.end() ? dflt : it->second;
}

}  // namespace

TwoToneModel model_library(const std::string& name, const std::map<std::string, double>& params) {
  using namespace ops;
  if (name == "circular" || name == "polarization") {
    double w0 = get_param(params, "omega0");
    double w = get_param(params, "omega");
    double A = get_param(params, "amplitude");
    if (name == "circular")
      return make_two_tone(0.5 * w0 * sigma_z(), A * sigma_y(), A * sigma_x(), A * sigma_y(),
                           A * sigma_x(), w, w);
    // opposite chirality: sign of the second sine flipped, static part along x
    return make_two_tone(0.5 * w0 * sigma_x(), A * sigma_y(), A * sigma_x(), -A * sigma_y(),
                         A * sigma_x(), w, w);
  }
  if (name == "zeeman") {
    double g = get_param(params, "g");
    double b0 = get_param(params, "b0");
    double b1 = get_param(params, "b1", b0);
    double b2 = get_param(params, "b2", b0);
    double w1 = get_param(params, "omega1");
    double w2 = get_param(params, "omega2", w1);
    Mat sz = spin_z(2);
    Mat zero = Mat::Zero(2, 2);
    return make_two_tone(-g * b0 * sz, zero, -g * b1 * sz, zero, -g * b2 * sz, w1, w2);
  }
  if (name == "specific") {
    double w0 = get_param(params, "omega0");
    double w = get_param(params, "omega");
    double A = get_param(params, "amplitude");
    return make_two_tone(0.5 * w0 * sigma_z(), 3 * A * sigma_y(), A * sigma_z(), A * sigma_x(),
                         2 * A * sigma_z(), w, w);
  }
  if (name == "qutrit") {
    double w = get_param(params, "omega");
    double w12 = get_param(params, "omega12", w);
    double w23 = get_param(params, "omega23", 0.5 * w);
    double A = get_param(params, "amplitude", 0.5 * w);
    Mat h0 = Mat::Zero(3, 3);
    h0(1, 1) = w12;
    h0(2, 2) = w12 + w23;
    auto bond = [](int a, int b) {
      Mat m = Mat::Zero(3, 3);
      m(a, b) = m(b, a) = 1;
      return m;
    };
    Mat h1e = 0.5 * A * bond(0, 1);   // g - e1
    Mat h2e = 0.5 * A * bond(1, 2);   // e1 - e2
    Mat h1o = 2.0 * A * bond(0, 2);   // g - e2, driven by both tones
    Mat h2o = -2.0 * A * bond(0, 2);
    return make_two_tone(h0, h1o, h1e, h2o, h2e, w, w);
  }
  throw std::invalid_argument("model_library: unknown model '" + name +
                              "' (try: circular, polarization, zeeman, specific, qutrit)");
}

Mat hermitian_exp(const Mat& h, double dt) {
  const int d = static_cast<int>(h.rows());
  if (d == 2) {
    // Pauli decomposition, exact 2x2 exponential
    double a0 = 0.5 * (h(0, 0).real() + h(1, 1).real());
    double az = 0.5 * (h(0, 0).real() - h(1, 1).real());
    double ax = h(0, 1).real();
    double ay = -h(0, 1).imag();
    double r = std::sqrt(ax * ax + ay * ay + az * az);
    double c = std::cos(r * dt);
    double sc = r > 1e-300 ? std::sin(r * dt) / r : dt;
    cxd ph = std::exp(-iu * (a0 * dt));
    Mat u(2, 2);
    u(0, 0) = ph * (c - iu * (az * sc));
    u(1, 1) = ph * (c + iu * (az * sc));
    u(0, 1) = ph * (-iu * cxd(ax, -ay) * sc);
    u(1, 0) = ph * (-iu * cxd(ax, ay) * sc);
    return u;
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(h);
  Vec ph = (-iu * dt * es.eigenvalues().array().cast<cxd>()).exp();
  return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

Mat propagate(const TwoToneModel& model, double phi1, double phi2, double duration,
              int steps_per_tcom) {
  if (duration <= 0) throw std::invalid_argument("propagate: duration must be > 0");
  if (steps_per_tcom < 100) throw std::invalid_argument("propagate: steps_per_Tcom >= 100");
  const double tcom = model.t_com();
  const long steps = std::max<long>(1, std::lround(steps_per_tcom * duration / tcom));
  const double dt = duration / steps;
  Mat u = Mat::Identity(model.dim(), model.dim());
  for (long k = 0; k < steps; ++k) {
    double tm = (k + 0.5) * dt;
    u = hermitian_exp(model.hamiltonian(tm, phi1, phi2), dt) * u;
  }
  return u;
}

namespace {

// Eigen-decompose a (numerically) unitary matrix: quasienergies folded to
// [-w_com/2, w_com/2), eigenvectors orthonormalized within degenerate clusters.
void eig_unitary(const Mat& u, double t_com, RVec& eps, Mat& v) {
  const int d = static_cast<int>(u.rows());
  Eigen::ComplexEigenSolver<Mat> es(u);
  std::vector<int> order(d);
  std::iota(order.begin(), order.end(), 0);
  RVec raw(d);
  for (int n = 0; n < d; ++n) raw(n) = -std::arg(es.eigenvalues()(n)) / t_com;
  std::sort(order.begin(), order.end(), [&](int a, int b) { return raw(a) < raw(b); });
  eps.resize(d);
  v.resize(d, d);
  for (int n = 0; n < d; ++n) {
    eps(n) = raw(order[n]);
    v.col(n) = es.eigenvectors().col(order[n]);
  }
  // orthonormalize clusters of near-degenerate eigenvalues (modified Gram-Schmidt)
  const double wcom = 2.0 * pi / t_com;
  int start = 0;
  while (start < d) {
    int end = start + 1;
    while (end < d && circle_dist(eps(end), eps(end - 1), wcom) < 1e-7) ++end;
    for (int a = start; a < end; ++a) {
      for (int b = start; b < a; ++b) v.col(a) -= v.col(b).dot(v.col(a)) * v.col(b);
      v.col(a).normalize();
    }
    start = end;
  }
}

// Match eigenvector columns of (e_new, v_new) to the reference basis v_ref by
// greedy maximum overlap; returns the applied permutation's worst overlap.
double match_bands(const Mat& v_ref, RVec& e, Mat& v) {
  const int d = static_cast<int>(v.cols());
  Mat ov = v_ref.adjoint() * v;
  std::vector<int> perm(d, -1);
  std::vector<bool> used(d, false);
  double worst = 1.0;
  // assign in order of decreasing confidence so ties break toward the
  // strongest matches first (band inertia)
  std::vector<int> rows(d);
  std::iota(rows.begin(), rows.end(), 0);
  std::sort(rows.begin(), rows.end(), [&](int a, int b) {
    return ov.row(a).cwiseAbs().maxCoeff() > ov.row(b).cwiseAbs().maxCoeff();
  });
  for (int r : rows) {
    int best = -1;
    double bv = -1;
    for (int c = 0; c < d; ++c) {
      if (used[c]) continue;
      double a = std::abs(ov(r, c));
      if (a > bv) {
        bv = a;
        best = c;
      }
    }
    perm[r] = best;
    used[best] = true;
    worst = std::min(worst, bv);
  }
  RVec e2(d);
  Mat v2(d, d);
  for (int n = 0; n < d; ++n) {
    e2(n) = e(perm[n]);
    v2.col(n) = v.col(perm[n]);
  }
  e = e2;
  v = v2;
  return worst;
}

}  // namespace

Vec FloquetSpectrum::band_vector(long idx, int n) const {
  Vec v(d);
  for (int r = 0; r < d; ++r) v(r) = vecs[idx * d * d + n * d + r];
  return v;
}

Mat FloquetSpectrum::power_matrix(long idx, int j) const {
  const std::vector<double>& de = (j == 1) ? deps1 : deps2;
  Mat p = Mat::Zero(d, d);
  for (int n = 0; n < d; ++n) {
    Vec v = band_vector(idx, n);
    p += de[idx * d + n] * (v * v.adjoint());
  }
  return p;
}

FloquetSpectrum quasienergies(const TwoToneModel& model, const PhaseGrid& grid,
                              int steps_per_tcom, int threads) {
  model.validate();
  if (threads <= 0) threads = default_threads();
  const int m = grid.m, d = model.dim();
  FloquetSpectrum s;
  s.grid = grid;
  s.d = d;
  s.t_com = model.t_com();
  s.omega_com = model.omega_com();
  s.omega1 = model.omega1;
  s.omega2 = model.omega2;
  s.eps.assign(grid.num_points() * d, 0.0);
  s.vecs.assign(grid.num_points() * d * d, cxd(0, 0));
  s.deps1.assign(grid.num_points() * d, 0.0);
  s.deps2.assign(grid.num_points() * d, 0.0);
  s.quality.assign(grid.num_points(), 1.0);

  // per-point diagonalization (independent, parallel over points)
  parallel_for(grid.num_points(), threads, [&](long idx) {
    int i1 = static_cast<int>(idx / m), i2 = static_cast<int>(idx % m);
    Mat u = propagate(model, grid.point(i1), grid.point(i2), s.t_com, steps_per_tcom);
    RVec e;
    Mat v;
    eig_unitary(u, s.t_com, e, v);
    for (int n = 0; n < d; ++n) {
      s.eps[idx * d + n] = e(n);
      for (int r = 0; r < d; ++r) s.vecs[idx * d * d + n * d + r] = v(r, n);
    }
  });

  // continuity tracking: row i1 = 0 along i2, then each column downward
  auto load = [&](long idx, RVec& e, Mat& v) {
    e.resize(d);
    v.resize(d, d);
    for (int n = 0; n < d; ++n) {
      e(n) = s.eps[idx * d + n];
      for (int r = 0; r < d; ++r) v(r, n) = s.vecs[idx * d * d + n * d + r];
    }
  };
  auto store = [&](long idx, const RVec& e, const Mat& v, double q) {
    for (int n = 0; n < d; ++n) {
      s.eps[idx * d + n] = e(n);
      for (int r = 0; r < d; ++r) s.vecs[idx * d * d + n * d + r] = v(r, n);
    }
    s.quality[idx] = std::min(s.quality[idx], q);
  };
  RVec e;
  Mat v, vref;
  for (int i2 = 1; i2 < m; ++i2) {
    long prev = grid.index(0, i2 - 1), cur = grid.index(0, i2);
    vref = s.basis(prev);
    load(cur, e, v);
    double q = match_bands(vref, e, v);
    store(cur, e, v, q);
  }
  for (int i1 = 1; i1 < m; ++i1)
    for (int i2 = 0; i2 < m; ++i2) {
      long prev = grid.index(i1 - 1, i2), cur = grid.index(i1, i2);
      vref = s.basis(prev);
      load(cur, e, v);
      double q = match_bands(vref, e, v);
      store(cur, e, v, q);
    }
  double worst = 1.0;
  for (double q : s.quality) worst = std::min(worst, q);
  s.tracking_ambiguous = worst < 0.5;

  // Exactly degenerate clusters carry an arbitrary eigenbasis; align them to
  // the tracked neighbor (orthogonal Procrustes) so the derivative pairing is
  // consistent across both grid axes. The rotation stays inside the
  // degenerate subspace, so eigen-residuals are unaffected.
  const double tol_deg = 1e-8 * s.omega_com;
  auto repair = [&](long idx, long ref) {
    std::vector<int> cluster_id(d, -1);
    int nclusters = 0;
    for (int n = 0; n < d; ++n) {
      if (cluster_id[n] >= 0) continue;
      cluster_id[n] = nclusters;
      for (int m2 = n + 1; m2 < d; ++m2)
        if (circle_dist(s.eps[idx * d + n], s.eps[idx * d + m2], s.omega_com) < tol_deg)
          cluster_id[m2] = nclusters;
      ++nclusters;
    }
    for (int cl = 0; cl < nclusters; ++cl) {
      std::vector<int> members;
      for (int n = 0; n < d; ++n)
        if (cluster_id[n] == cl) members.push_back(n);
      if (members.size() < 2) continue;
      const int csz = static_cast<int>(members.size());
      Mat a(d, csz), b(d, csz);
      for (int k = 0; k < csz; ++k) {
        for (int r = 0; r < d; ++r) {
          a(r, k) = s.vecs[idx * d * d + members[k] * d + r];
          b(r, k) = s.vecs[ref * d * d + members[k] * d + r];
        }
      }
      Mat overlap = a.adjoint() * b;
      Eigen::JacobiSVD<Mat> svd(overlap, Eigen::ComputeFullU | Eigen::ComputeFullV);
      Mat rot = svd.matrixU() * svd.matrixV().adjoint();
      Mat aligned = a * rot;
      for (int k = 0; k < csz; ++k)
        for (int r = 0; r < d; ++r) s.vecs[idx * d * d + members[k] * d + r] = aligned(r, k);
    }
  };
  for (int i2 = 1; i2 < m; ++i2) repair(grid.index(0, i2), grid.index(0, i2 - 1));
  for (int i1 = 1; i1 < m; ++i1)
    for (int i2 = 0; i2 < m; ++i2) repair(grid.index(i1, i2), grid.index(i1 - 1, i2));

  // Central differences with minimal-image folding; neighbor bands paired by
  // eigenvector overlap, one-sided where a pairing is too ambiguous. At an
  // exact band touching the tracked branch kinks symmetrically and the central
  // difference lands on zero, the measure-zero-safe value that keeps the
  // traceless and energy-conservation identities intact.
  parallel_for(grid.num_points(), threads, [&](long idx) {
    int i1 = static_cast<int>(idx / m), i2 = static_cast<int>(idx % m);
    Mat vc = s.basis(idx);
    for (int axis = 0; axis < 2; ++axis) {
      long ip = axis == 0 ? grid.index(grid.wrap(i1 + 1), i2) : grid.index(i1, grid.wrap(i2 + 1));
      long im = axis == 0 ? grid.index(grid.wrap(i1 - 1), i2) : grid.index(i1, grid.wrap(i2 - 1));
      Eigen::MatrixXd ovp = (vc.adjoint() * s.basis(ip)).cwiseAbs();
      Eigen::MatrixXd ovm = (vc.adjoint() * s.basis(im)).cwiseAbs();
      for (int n = 0; n < d; ++n) {
        int np = 0, nm = 0;
        ovp.row(n).maxCoeff(&np);
        ovm.row(n).maxCoeff(&nm);
        bool okp = std::abs(ovp(n, np)) >= 0.5, okm = std::abs(ovm(n, nm)) >= 0.5;
        double dep = fold_interval(s.eps[ip * d + np] - s.eps[idx * d + n], s.omega_com);
        double dem = fold_interval(s.eps[idx * d + n] - s.eps[im * d + nm], s.omega_com);
        double h = grid.spacing();
        double der;
        if (okp && okm)
          der = (dep + dem) / (2 * h);
        else if (okp)
          der = dep / h;
        else if (okm)
          der = dem / h;
        else
          der = (dep + dem) / (2 * h);
        (axis == 0 ? s.deps1 : s.deps2)[idx * d + n] = der;
      }
    }
  });
  return s;
}

PowerStates power_states(const FloquetSpectrum& s, long idx, int j) {
  if (s.d != 2) throw std::invalid_argument("power_states: qubit models only");
  const std::vector<double>& de = (j == 1) ? s.deps1 : s.deps2;
  PowerStates out;
  int nplus = de[idx * 2] >= de[idx * 2 + 1] ? 0 : 1;
  out.plus = s.band_vector(idx, nplus);
  out.minus = s.band_vector(idx, 1 - nplus);
  out.value = std::abs(de[idx * 2 + nplus]);
  return out;
}

PowerIdentity power_identity(const FloquetSpectrum& s) {
  PowerIdentity out;
  for (long idx = 0; idx < s.grid.num_points(); ++idx) {
    double t1 = 0, t2 = 0;
    for (int n = 0; n < s.d; ++n) {
      t1 += s.deps1[idx * s.d + n];
      t2 += s.deps2[idx * s.d + n];
    }
    out.max_trace = std::max({out.max_trace, std::abs(t1), std::abs(t2)});
    Mat c = s.omega1 * s.power_matrix(idx, 1) + s.omega2 * s.power_matrix(idx, 2);
    out.max_energy_conservation = std::max(out.max_energy_conservation, c.cwiseAbs().maxCoeff());
  }
  return out;
}

void write_spectrum_csv(const FloquetSpectrum& s, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("write_spectrum_csv: cannot open " + path);
  f << "phi1,phi2,band,eps_folded,deps_dphi1,deps_dphi2\n";
  char buf[256];
  for (long idx = 0; idx < s.grid.num_points(); ++idx) {
    int i1 = static_cast<int>(idx / s.grid.m), i2 = static_cast<int>(idx % s.grid.m);
    for (int n = 0; n < s.d; ++n) {
      std::snprintf(buf, sizeof(buf), "%.12g,%.12g,%d,%.12g,%.12g,%.12g\n", s.grid.point(i1),
                    s.grid.point(i2), n, s.eps[idx * s.d + n], s.deps1[idx * s.d + n],
                    s.deps2[idx * s.d + n]);
      f << buf;
    }
  }
}

EnergyTrace energy_transfer_trace(const TwoToneModel& model, double phi1, double phi2,
                                  const Vec& psi0, double horizon, int steps_per_tcom,
                                  int sample_stride) {
  if (std::abs(psi0.norm() - 1.0) > 1e-9)
    throw std::invalid_argument("energy_transfer_trace: initial state not normalized");
  const double tcom = model.t_com();
  const long steps = std::max<long>(1, std::lround(steps_per_tcom * horizon / tcom));
  const double dt = horizon / steps;
  if (sample_stride <= 0) sample_stride = std::max<long>(1, steps / 4096);
  Vec psi = psi0;
  double e1 = 0, e2 = 0;
  EnergyTrace out;
  out.t.push_back(0);
  out.e1.push_back(0);
  out.e2.push_back(0);
  for (long k = 0; k < steps; ++k) {
    double tm = (k + 0.5) * dt;
    Mat uh = hermitian_exp(model.hamiltonian(tm, phi1, phi2), 0.5 * dt);
    Vec mid = uh * psi;
    e1 += dt * (mid.adjoint() * model.drive_rate(1, tm, phi1, phi2) * mid)(0).real();
    e2 += dt * (mid.adjoint() * model.drive_rate(2, tm, phi1, phi2) * mid)(0).real();
    psi = uh * mid;
    if ((k + 1) % sample_stride == 0 || k + 1 == steps) {
      out.t.push_back((k + 1) * dt);
      out.e1.push_back(e1);
      out.e2.push_back(e2);
    }
  }
  return out;
}

}  // namespace floqsens::floquet
