#include "floqsens/fock.hpp"

#include <cmath>
#include <fstream>

namespace floqsens::fock {

double FockState::norm2() const {
  double s = 0;
  for (const cxd& a : amp) s += std::norm(a);
  return s;
}

double FockState::boundary_population() const {
  double w = 0;
  for (int l = 0; l < d; ++l)
    for (int n1 = 0; n1 <= n_max; ++n1)
      for (int n2 = 0; n2 <= n_max; ++n2)
        if (n1 >= n_max - 1 || n2 >= n_max - 1) w += std::norm(amp[index(l, n1, n2)]);
  return w;
}

int default_n_max(int n_c) {
  return n_c + static_cast<int>(std::ceil(6.0 * std::sqrt(double(n_c)))) + 8;
}

QuantizedModel quantize(const floquet::TwoToneModel& model, int n1c, int n2c, int n_max) {
  if (n1c < 1 || n2c < 1) throw std::invalid_argument("quantize: reference occupations >= 1");
  if (n_max <= std::max(n1c, n2c))
    throw std::invalid_argument("quantize: n_max must exceed the reference occupations");
  QuantizedModel qm;
  qm.d = model.dim();
  qm.n_max = n_max;
  qm.n1c = n1c;
  qm.n2c = n2c;
  qm.omega1 = model.omega1;
  qm.omega2 = model.omega2;
  qm.t_com = model.t_com();
  qm.h0 = model.h0;
  qm.c1o = model.h1o / std::sqrt(double(n1c));
  qm.c1e = model.h1e / std::sqrt(double(n1c));
  qm.c2o = model.h2o / std::sqrt(double(n2c));
  qm.c2e = model.h2e / std::sqrt(double(n2c));
  for (const Mat* c : {&qm.h0, &qm.c1o, &qm.c1e, &qm.c2o, &qm.c2e})
    if (!ops::is_hermitian(*c, 1e-10)) throw std::invalid_argument("quantize: non-Hermitian block");
  return qm;
}

void QuantizedModel::apply(const cxd* x, cxd* y) const {
  const int M = n_max + 1;
  const long stride_l = static_cast<long>(M) * M;
  // H0 + HB diagonal-in-number part
  for (int a = 0; a < d; ++a) {
    for (int n1 = 0; n1 < M; ++n1)
      for (int n2 = 0; n2 < M; ++n2) {
        long k = static_cast<long>(n1) * M + n2;
        cxd acc = (omega1 * n1 + omega2 * n2) * x[a * stride_l + k];
        for (int b = 0; b < d; ++b) acc += h0(a, b) * x[b * stride_l + k];
        y[a * stride_l + k] = acc;
      }
  }
  // couplings: He (a + a^dag)/2 and Ho (a - a^dag)/(2i) on each mode.
  // (a psi)(n) = sqrt(n+1) psi(n+1), (a^dag psi)(n) = sqrt(n) psi(n-1)
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      cxd e1 = c1e(a, b), o1 = c1o(a, b), e2 = c2e(a, b), o2 = c2o(a, b);
      bool use1 = std::norm(e1) + std::norm(o1) > 0;
      bool use2 = std::norm(e2) + std::norm(o2) > 0;
      if (!use1 && !use2) continue;
      const cxd* xb = x + b * stride_l;
      cxd* ya = y + a * stride_l;
      if (use1) {
        cxd lower = 0.5 * e1 - o1 / (2.0 * iu);   // coefficient of a^dag term... see below
        cxd raise = 0.5 * e1 + o1 / (2.0 * iu);
        // He (a+adag)/2 + Ho (a-adag)/(2i):
        //   coefficient of a      : e1/2 + o1/(2i)
        //   coefficient of a^dag  : e1/2 - o1/(2i)
        for (int n1 = 0; n1 < M; ++n1) {
          double sdn = std::sqrt(double(n1));
          double sup = std::sqrt(double(n1 + 1));
          for (int n2 = 0; n2 < M; ++n2) {
            long k = static_cast<long>(n1) * M + n2;
            cxd acc(0, 0);
            if (n1 + 1 < M) acc += raise * sup * xb[k + M];  // a: psi(n1+1)
            if (n1 > 0) acc += lower * sdn * xb[k - M];      // a^dag: psi(n1-1)
            ya[k] += acc;
          }
        }
      }
      if (use2) {
        cxd lower = 0.5 * e2 - o2 / (2.0 * iu);
        cxd raise = 0.5 * e2 + o2 / (2.0 * iu);
        for (int n1 = 0; n1 < M; ++n1)
          for (int n2 = 0; n2 < M; ++n2) {
            long k = static_cast<long>(n1) * M + n2;
            cxd acc(0, 0);
            if (n2 + 1 < M) acc += raise * std::sqrt(double(n2 + 1)) * xb[k + 1];
            if (n2 > 0) acc += lower * std::sqrt(double(n2)) * xb[k - 1];
            ya[k] += acc;
          }
      }
    }
}

double QuantizedModel::norm_bound() const {
  double c = h0.cwiseAbs().maxCoeff() * d;
  double amp = (c1o.cwiseAbs().maxCoeff() + c1e.cwiseAbs().maxCoeff() +
                c2o.cwiseAbs().maxCoeff() + c2e.cwiseAbs().maxCoeff()) *
               d * std::sqrt(double(n_max + 1));
  return (omega1 + omega2) * n_max + c + amp;
}

double QuantizedModel::energy_mean(const FockState& s) const {
  std::vector<cxd> y(s.amp.size());
  apply(s.amp.data(), y.data());
  cxd e(0, 0);
  for (size_t k = 0; k < y.size(); ++k) e += std::conj(s.amp[k]) * y[k];
  return e.real();
}

FockState drive_input(InputKind kind, int n1c, int n2c, double phi10, double phi20, int n_max,
                      const Vec& qudit) {
  if (std::abs(qudit.norm() - 1.0) > 1e-9)
    throw std::invalid_argument("drive_input: qudit state not normalized");
  const int M = n_max + 1;
  FockState s;
  s.d = static_cast<int>(qudit.size());
  s.n_max = n_max;
  s.amp.assign(s.dim(), cxd(0, 0));
  auto mode_amp = [&](int nc, double phi0) {
    std::vector<cxd> c(M, cxd(0, 0));
    if (kind == InputKind::Fock) {
      if (nc > n_max) throw std::invalid_argument("drive_input: occupation beyond truncation");
      c[nc] = 1;
      return c;
    }
    double mass = 0;
    for (int n = 0; n < M; ++n) {
      double lg = -0.5 * nc + 0.5 * n * std::log(double(nc)) - 0.5 * std::lgamma(double(n) + 1);
      c[n] = std::exp(lg) * std::exp(iu * (phi0 * n));
      mass += std::norm(c[n]);
    }
    if (mass < 1.0 - 1e-9)
      throw std::invalid_argument("drive_input: truncation captures too little coherent mass");
    double inv = 1.0 / std::sqrt(mass);
    for (cxd& a : c) a *= inv;
    return c;
  };
  std::vector<cxd> a1 = mode_amp(n1c, phi10);
  std::vector<cxd> a2 = mode_amp(n2c, phi20);
  for (int l = 0; l < s.d; ++l)
    for (int n1 = 0; n1 < M; ++n1)
      for (int n2 = 0; n2 < M; ++n2) s.amp[s.index(l, n1, n2)] = qudit(l) * a1[n1] * a2[n2];
  return s;
}

namespace {

// One Lanczos step: psi <- exp(-i H dt) psi with full reorthogonalization.
// Returns the Krylov dimension used.
int lanczos_step(const QuantizedModel& qm, std::vector<cxd>& psi, double dt, double tol,
                 int max_dim) {
  const long n = static_cast<long>(psi.size());
  double nrm = 0;
  for (const cxd& a : psi) nrm += std::norm(a);
  nrm = std::sqrt(nrm);
  if (nrm == 0) return 0;

  std::vector<std::vector<cxd>> v;
  v.reserve(max_dim);
  v.emplace_back(psi);
  for (cxd& a : v[0]) a /= nrm;
  std::vector<double> alpha, beta;
  std::vector<cxd> w(n);

  auto dot = [&](const std::vector<cxd>& a, const std::vector<cxd>& b) {
    cxd s(0, 0);
    for (long i = 0; i < n; ++i) s += std::conj(a[i]) * b[i];
    return s;
  };

  Eigen::VectorXcd combo;
  int m_used = 0;
  for (int j = 0; j < max_dim; ++j) {
    qm.apply(v[j].data(), w.data());
    double a = dot(v[j], w).real();
    alpha.push_back(a);
    for (long i = 0; i < n; ++i) w[i] -= a * v[j][i];
    if (j > 0)
      for (long i = 0; i < n; ++i) w[i] -= beta[j - 1] * v[j - 1][i];
    // full reorthogonalization (cheap: Krylov dimension is small)
    for (int k = 0; k <= j; ++k) {
      cxd c = dot(v[k], w);
      for (long i = 0; i < n; ++i) w[i] -= c * v[k][i];
    }
    double b = 0;
    for (const cxd& x : w) b += std::norm(x);
    b = std::sqrt(b);

    // exponentiate the tridiagonal projection and estimate the residual
    int mdim = j + 1;
    Eigen::MatrixXd tmat = Eigen::MatrixXd::Zero(mdim, mdim);
    for (int k = 0; k < mdim; ++k) {
      tmat(k, k) = alpha[k];
      if (k > 0) tmat(k, k - 1) = tmat(k - 1, k) = beta[k - 1];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tmat);
    Eigen::VectorXcd e1 = Eigen::VectorXcd::Zero(mdim);
    e1(0) = 1;
    Eigen::VectorXcd y = es.eigenvectors().transpose().cast<cxd>() * e1;
    for (int k = 0; k < mdim; ++k) y(k) *= std::exp(-iu * (es.eigenvalues()(k) * dt));
    combo = es.eigenvectors().cast<cxd>() * y;
    double resid = b * std::abs(combo(mdim - 1)) * dt;
    m_used = mdim;
    if (resid < tol || b < 1e-14 || j + 1 == max_dim) break;
    beta.push_back(b);
    v.emplace_back(w);
    for (cxd& x : v.back()) x /= b;
  }
  for (long i = 0; i < n; ++i) {
    cxd acc(0, 0);
    for (int k = 0; k < m_used; ++k) acc += combo(k) * v[k][i];
    psi[i] = acc * nrm;
  }
  return m_used;
}

}  // namespace

FockState evolve_fock(const QuantizedModel& qm, const FockState& psi0, double T,
                      const EvolveOptions& opt) {
  if (T < 0) throw std::invalid_argument("evolve_fock: T >= 0 required");
  if (std::abs(psi0.norm2() - 1.0) > 1e-8)
    throw std::invalid_argument("evolve_fock: input not normalized");
  FockState s = psi0;
  if (T == 0) return s;
  double step = opt.step > 0 ? opt.step : qm.t_com / 50.0;
  long nsteps = std::max<long>(1, std::lround(T / step));
  double dt = T / nsteps;
  long check_every = std::max<long>(1, std::lround(qm.t_com / dt));
  for (long k = 0; k < nsteps; ++k) {
    lanczos_step(qm, s.amp, dt, opt.tol, opt.max_krylov);
    if ((k + 1) % check_every == 0 || k + 1 == nsteps) {
      double bp = s.boundary_population();
      if (bp > opt.breach_tol)
        throw TruncationBreach("evolve_fock: boundary-shell population " + std::to_string(bp) +
                                   " exceeds tolerance",
                               (k + 1) * dt);
    }
  }
  return s;
}

PesFockResult pes_fock(const FockState& state, const Vec& ancilla) {
  if (state.d != ancilla.size()) throw std::invalid_argument("pes_fock: dimension mismatch");
  const int M = state.n_max + 1;
  PesFockResult out;
  out.n_max = state.n_max;
  out.amp.assign(static_cast<long>(M) * M, cxd(0, 0));
  for (int n1 = 0; n1 < M; ++n1)
    for (int n2 = 0; n2 < M; ++n2) {
      cxd a(0, 0);
      for (int l = 0; l < state.d; ++l)
        a += std::conj(ancilla(l)) * state.amp[state.index(l, n1, n2)];
      out.amp[static_cast<long>(n1) * M + n2] = a;
    }
  double n2tot = 0;
  for (const cxd& a : out.amp) n2tot += std::norm(a);
  out.success = n2tot;
  if (n2tot < 1e-12) throw std::runtime_error("pes_fock: projection annihilates the state");
  double inv = 1.0 / std::sqrt(n2tot);
  for (cxd& a : out.amp) a *= inv;
  return out;
}

double jz_mean(const TwoModeFockView& v) {
  const int M = v.n_max + 1;
  double s = 0;
  for (int n1 = 0; n1 < M; ++n1)
    for (int n2 = 0; n2 < M; ++n2)
      s += std::norm(v.amp[static_cast<long>(n1) * M + n2]) * 0.5 * (n1 - n2);
  return s;
}

double jz_second(const TwoModeFockView& v) {
  const int M = v.n_max + 1;
  double s = 0;
  for (int n1 = 0; n1 < M; ++n1)
    for (int n2 = 0; n2 < M; ++n2) {
      double jz = 0.5 * (n1 - n2);
      s += std::norm(v.amp[static_cast<long>(n1) * M + n2]) * jz * jz;
    }
  return s;
}

double mode_mean(const TwoModeFockView& v, int mode) {
  const int M = v.n_max + 1;
  double s = 0;
  for (int n1 = 0; n1 < M; ++n1)
    for (int n2 = 0; n2 < M; ++n2)
      s += std::norm(v.amp[static_cast<long>(n1) * M + n2]) * (mode == 1 ? n1 : n2);
  return s;
}

double n1n2_mean(const TwoModeFockView& v) {
  const int M = v.n_max + 1;
  double s = 0;
  for (int n1 = 0; n1 < M; ++n1)
    for (int n2 = 0; n2 < M; ++n2)
      s += std::norm(v.amp[static_cast<long>(n1) * M + n2]) * double(n1) * n2;
  return s;
}

ops::SwapSpectrum swap_spectrum_fock(const TwoModeFockView& v) {
  const int M = v.n_max + 1;
  ops::SwapSpectrum sp;
  sp.m = M;
  sp.s.assign(2 * M - 1, cxd(0, 0));
  for (int n1 = 0; n1 < M; ++n1)
    for (int n2 = 0; n2 < M; ++n2)
      sp.s[(n1 - n2) + M - 1] += std::conj(v.amp[static_cast<long>(n1) * M + n2]) *
                                 v.amp[static_cast<long>(n2) * M + n1];
  return sp;
}

cxd parity_swap_expectation(const TwoModeFockView& v, double theta) {
  return swap_spectrum_fock(v).parity(theta);
}

Mat reduced_ancilla_density(const FockState& s) {
  const int M = s.n_max + 1;
  Mat rho = Mat::Zero(s.d, s.d);
  for (int n1 = 0; n1 < M; ++n1)
    for (int n2 = 0; n2 < M; ++n2)
      for (int a = 0; a < s.d; ++a)
        for (int b = 0; b < s.d; ++b)
          rho(a, b) += s.amp[s.index(a, n1, n2)] * std::conj(s.amp[s.index(b, n1, n2)]);
  return rho;
}

void write_state_csv(const FockState& s, const std::string& path, double min_weight) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("write_state_csv: cannot open " + path);
  f << "lambda,n1,n2,re,im\n";
  char buf[192];
  for (int l = 0; l < s.d; ++l)
    for (int n1 = 0; n1 <= s.n_max; ++n1)
      for (int n2 = 0; n2 <= s.n_max; ++n2) {
        cxd a = s.amp[s.index(l, n1, n2)];
        if (std::norm(a) < min_weight) continue;
        std::snprintf(buf, sizeof(buf), "%d,%d,%d,%.12g,%.12g\n", l, n1, n2, a.real(), a.imag());
        f << buf;
      }
}

}  // namespace floqsens::fock
