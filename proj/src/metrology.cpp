#include "floqsens/metrology.hpp"

#include <fstream>

namespace floqsens::metrology {

double qfi_pure(const Vec& psi, const ops::TwoModeOperator& generator) {
  if (std::abs(psi.norm() - 1.0) > 1e-9)
    throw std::invalid_argument("qfi_pure: state not normalized");
  Vec ap = generator.mat * psi;
  double m1 = psi.dot(ap).real();
  double m2 = ap.squaredNorm();  // <A^2> for Hermitian A
  return 4.0 * (m2 - m1 * m1);
}

double qfi_pure_jz(const TwoModeWave& w) {
  ops::JzMoments mom = ops::jz_moments(w);
  return 4.0 * mom.variance();
}

double qfi_pure_jz_fock(int n_max, const std::vector<cxd>& amp) {
  const int M = n_max + 1;
  double m1 = 0, m2 = 0;
  for (int n1 = 0; n1 < M; ++n1)
    for (int n2 = 0; n2 < M; ++n2) {
      double p = std::norm(amp[static_cast<long>(n1) * M + n2]);
      double jz = 0.5 * (n1 - n2);
      m1 += p * jz;
      m2 += p * jz * jz;
    }
  return 4.0 * (m2 - m1 * m1);
}

double qfi_mixed(const Mat& rho, const Mat& generator) {
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-9)
    throw std::invalid_argument("qfi_mixed: density matrix not Hermitian");
  if (std::abs(rho.trace().real() - 1.0) > 1e-9)
    throw std::invalid_argument("qfi_mixed: trace must be 1");
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (rho + rho.adjoint()));
  RVec lam = es.eigenvalues();
  if (lam.minCoeff() < -1e-8)
    throw std::invalid_argument("qfi_mixed: density matrix not positive semidefinite");
  // loss-channel round-off produces tiny negatives: clamp and renormalize
  for (int k = 0; k < lam.size(); ++k) lam(k) = std::max(lam(k), 0.0);
  lam /= lam.sum();
  Mat a = es.eigenvectors().adjoint() * generator * es.eigenvectors();
  double f = 0;
  for (int k = 0; k < lam.size(); ++k)
    for (int l = 0; l < lam.size(); ++l) {
      double s = lam(k) + lam(l);
      if (s <= 1e-12) continue;
      double d = lam(k) - lam(l);
      f += 2.0 * d * d / s * std::norm(a(k, l));
    }
  return f;
}

QfiBound qfi_bound(const FloquetSpectrum& s, const FieldDistribution& f) {
  if (s.d != 2)
    throw std::invalid_argument("qfi_bound: the analytic window is qubit-specific");
  if (s.grid.m != f.grid.m) throw std::invalid_argument("qfi_bound: grid mismatch");
  QfiBound out;
  for (long idx = 0; idx < s.grid.num_points(); ++idx) {
    double w = std::norm(f.amp[idx]);
    if (w == 0) continue;
    for (int n = 0; n < 2; ++n) {
      double dd = s.deps1[idx * 2 + n] - s.deps2[idx * 2 + n];
      out.p2 += 0.5 * w * dd * dd;
    }
  }
  return out;
}

double q_bound(const FloquetSpectrum& s, const FieldDistribution& f) {
  if (s.grid.m != f.grid.m) throw std::invalid_argument("q_bound: grid mismatch");
  double q = 0;
  for (long idx = 0; idx < s.grid.num_points(); ++idx) {
    double w = std::norm(f.amp[idx]);
    if (w == 0) continue;
    q += w * std::abs(s.deps1[idx * s.d + 0] * s.deps2[idx * s.d + (s.d > 1 ? 1 : 0)]);
  }
  return q;
}

Witness entanglement_witness(const TwoModeWave& w, double error_estimate) {
  double n1 = ops::mode_mean(w, 1);
  double n2 = ops::mode_mean(w, 2);
  double n12 = ops::n1n2_mean(w);
  Witness out;
  out.k = -2.0 * (n12 - n1 * n2);
  out.error = error_estimate;
  out.path_entangled = out.k > 3.0 * std::max(error_estimate, 1e-12);
  return out;
}

OptimizeResult optimize_ancilla_phases(const FloquetSpectrum& s, const FieldDistribution& f,
                                       const lattice::FunctionalPowerOperator& p,
                                       const OptimizeConfig& cfg) {
  if (p.zero_power)
    throw lattice::ZeroPowerError("optimize_ancilla_phases: zero functional power");
  const int nfree = p.free_phase_count();
  OptimizeResult out;
  out.free_phases = nfree;
  out.grid_points = cfg.grid_points;
  const double T = cfg.k_strob * s.t_com;
  long total = 1;
  for (int k = 0; k < nfree; ++k) total *= cfg.grid_points;
  out.landscape.assign(total, 0.0);

  int threads = cfg.threads > 0 ? cfg.threads : default_threads();
  parallel_for(total, threads, [&](long flat) {
    std::vector<double> betas(nfree);
    long rem = flat;
    for (int k = nfree - 1; k >= 0; --k) {
      betas[k] = 2.0 * pi * (rem % cfg.grid_points) / cfg.grid_points;
      rem /= cfg.grid_points;
    }
    Vec anc = lattice::ancilla_state(p, betas);
    TwoModeWave w = lattice::pes_at(s, f, anc, cfg.k_strob);
    out.landscape[flat] = qfi_pure_jz(w) / (T * T);
  });

  long best = 0, worst = 0;
  for (long k = 1; k < total; ++k) {
    if (out.landscape[k] > out.landscape[best]) best = k;
    if (out.landscape[k] < out.landscape[worst]) worst = k;
  }
  out.best_qfi_per_t2 = out.landscape[best];
  out.min_qfi_per_t2 = out.landscape[worst];
  out.flat = (out.best_qfi_per_t2 - out.min_qfi_per_t2) <
             1e-10 * std::max(1.0, std::abs(out.best_qfi_per_t2));
  out.best_betas.resize(nfree);
  long rem = best;
  for (int k = nfree - 1; k >= 0; --k) {
    out.best_betas[k] = 2.0 * pi * (rem % cfg.grid_points) / cfg.grid_points;
    rem /= cfg.grid_points;
  }

  if (cfg.refine && !out.flat) {
    double step = 2.0 * pi / cfg.grid_points / 2.0;
    std::vector<double> betas = out.best_betas;
    double fbest = out.best_qfi_per_t2;
    for (int it = 0; it < cfg.refine_iters; ++it) {
      bool improved = false;
      for (int k = 0; k < nfree; ++k)
        for (double sgn : {+1.0, -1.0}) {
          std::vector<double> trial = betas;
          trial[k] += sgn * step;
          Vec anc = lattice::ancilla_state(p, trial);
          TwoModeWave w = lattice::pes_at(s, f, anc, cfg.k_strob);
          double val = qfi_pure_jz(w) / (T * T);
          if (val > fbest) {
            fbest = val;
            betas = trial;
            improved = true;
          }
        }
      if (!improved) step *= 0.5;
      if (step < 1e-4) break;
    }
    out.best_betas = betas;
    out.best_qfi_per_t2 = fbest;
  }
  return out;
}

Vec noon_state(int n) {
  if (n < 1) throw std::invalid_argument("noon_state: N >= 1");
  const int M = n + 1;
  Vec v = Vec::Zero(static_cast<long>(M) * M);
  v(ops::fock_index(n, 0, n)) = 1.0 / std::sqrt(2.0);
  v(ops::fock_index(0, n, n)) = 1.0 / std::sqrt(2.0);
  return v;
}

Vec twin_fock_state(int n) {
  if (n < 2 || n % 2 != 0) throw std::invalid_argument("twin_fock_state: even N >= 2");
  const int M = n + 1;
  // exp(i pi/4 (a1+ a2 + a2+ a1)) |N/2, N/2>
  Mat jx = Mat(ops::build_angular_momentum('x', n).mat);
  Eigen::SelfAdjointEigenSolver<Mat> es(jx);
  Vec v0 = Vec::Zero(static_cast<long>(M) * M);
  v0(ops::fock_index(n / 2, n / 2, n)) = 1.0;
  Vec ph = (iu * (pi / 2) * es.eigenvalues().array().cast<cxd>()).exp();
  return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint() * v0;
}

void SensingReport::write_csv(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("SensingReport: cannot open " + path);
  f << "T,qfi,bound_lo,bound_hi,mean_jz,K,Q\n";
  char buf[256];
  for (size_t k = 0; k < t_over_tcom.size(); ++k) {
    std::snprintf(buf, sizeof(buf), "%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n", t_over_tcom[k],
                  qfi[k], bound_lo[k], bound_hi[k], mean_jz[k], witness_k[k], q_window);
    f << buf;
  }
}

void SensingReport::write_json(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("SensingReport: cannot open " + path);
  f << "{\n  \"model\": \"" << model << "\",\n  \"input\": \"" << input << "\",\n";
  f << "  \"q_window\": " << q_window << ",\n  \"rows\": [\n";
  for (size_t k = 0; k < t_over_tcom.size(); ++k) {
    f << "    {\"T\": " << t_over_tcom[k] << ", \"qfi\": " << qfi[k]
      << ", \"bound_lo\": " << bound_lo[k] << ", \"bound_hi\": " << bound_hi[k]
      << ", \"mean_jz\": " << mean_jz[k] << ", \"K\": " << witness_k[k] << "}"
      << (k + 1 < t_over_tcom.size() ? "," : "") << "\n";
  }
  f << "  ]\n}\n";
}

}  // namespace floqsens::metrology
