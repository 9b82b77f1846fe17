#include "floqsens/channels.hpp"

#include "floqsens/metrology.hpp"

#include <cmath>

namespace floqsens::channels {

namespace {

// amplitude of K_j on |n1>: (1-eta)^{j/2} eta^{(n1-j)/2} sqrt(binom(n1, j) * j! ... )
// K_j = (1-eta)^{j/2} eta^{n1/2 after loss} a1^j / sqrt(j!)
double kraus_amp(int n1, int j, double eta) {
  if (j > n1) return 0;
  // a1^j |n1> = sqrt(n1!/(n1-j)!) |n1-j>
  double lg = 0.5 * (std::lgamma(n1 + 1.0) - std::lgamma(n1 - j + 1.0) - std::lgamma(j + 1.0));
  double le = 0.5 * (j * std::log1p(-eta) + (n1 - j) * std::log(eta));
  return std::exp(lg + le);
}

}  // namespace

Mat lossy_channel(const Mat& rho, double eta, int n_max) {
  if (eta < 0 || eta > 1) throw std::invalid_argument("lossy_channel: eta in [0,1]");
  const int M = n_max + 1;
  const long dim = static_cast<long>(M) * M;
  if (rho.rows() != dim) throw std::invalid_argument("lossy_channel: dimension mismatch");
  Mat out = Mat::Zero(dim, dim);
  if (eta == 1.0) return rho;
  if (eta == 0.0) {
    // complete loss: every photon in mode 1 leaks out
    for (int n1 = 0; n1 <= n_max; ++n1)
      for (int n1p = 0; n1p <= n_max; ++n1p)
        if (n1 == n1p)
          for (int n2 = 0; n2 <= n_max; ++n2)
            for (int n2p = 0; n2p <= n_max; ++n2p)
              out(ops::fock_index(0, n2, n_max), ops::fock_index(0, n2p, n_max)) +=
                  rho(ops::fock_index(n1, n2, n_max), ops::fock_index(n1p, n2p, n_max));
    return out;
  }
  for (int j = 0; j <= n_max; ++j) {
    // K_j rho K_j^dag, K_j acting only on mode 1 occupations
    for (int n1 = j; n1 <= n_max; ++n1) {
      double a = kraus_amp(n1, j, eta);
      if (a == 0) continue;
      for (int n1p = j; n1p <= n_max; ++n1p) {
        double b = kraus_amp(n1p, j, eta);
        if (b == 0) continue;
        double w = a * b;
        for (int n2 = 0; n2 <= n_max; ++n2)
          for (int n2p = 0; n2p <= n_max; ++n2p)
            out(ops::fock_index(n1 - j, n2, n_max), ops::fock_index(n1p - j, n2p, n_max)) +=
                w * rho(ops::fock_index(n1, n2, n_max), ops::fock_index(n1p, n2p, n_max));
      }
    }
  }
  return out;
}

Mat lossy_channel(const Vec& pure, double eta, int n_max) {
  Mat rho = pure * pure.adjoint();
  return lossy_channel(rho, eta, n_max);
}

Mat kraus_completeness(double eta, int n_max) {
  const int M = n_max + 1;
  const long dim = static_cast<long>(M) * M;
  Mat s = Mat::Zero(dim, dim);
  // K_j^dag K_j is diagonal: sum_j |amp(n1,j)|^2 on each |n1>
  for (int n1 = 0; n1 <= n_max; ++n1) {
    double tot = 0;
    for (int j = 0; j <= n1; ++j) {
      double a = kraus_amp(n1, j, eta);
      tot += a * a;
    }
    for (int n2 = 0; n2 <= n_max; ++n2) {
      long k = ops::fock_index(n1, n2, n_max);
      s(k, k) = tot;
    }
  }
  return s;
}

std::vector<LossPoint> loss_sweep(const Vec& state, int n_max, const std::vector<double>& etas,
                                  int parity_samples) {
  const int M = n_max + 1;
  Mat jz = Mat::Zero(static_cast<long>(M) * M, static_cast<long>(M) * M);
  for (int n1 = 0; n1 <= n_max; ++n1)
    for (int n2 = 0; n2 <= n_max; ++n2) {
      long k = ops::fock_index(n1, n2, n_max);
      jz(k, k) = 0.5 * (n1 - n2);
    }
  std::vector<LossPoint> out;
  for (double eta : etas) {
    Mat rho = lossy_channel(state, eta, n_max);
    LossPoint p;
    p.eta = eta;
    p.qfi = metrology::qfi_mixed(rho, jz);
    p.dtheta_qfi = p.qfi > 0 ? 1.0 / std::sqrt(p.qfi) : std::numeric_limits<double>::infinity();
    readout::ParityCurve c = readout::parity_curve_density(rho, n_max, parity_samples);
    p.dtheta_parity = c.best_delta_theta();
    out.push_back(p);
  }
  return out;
}

PriorModel PriorModel::gaussian(double dtheta, int nodes) {
  if (dtheta <= 0) throw std::invalid_argument("PriorModel: width must be > 0");
  if (nodes < 2) throw std::invalid_argument("PriorModel: at least 2 nodes");
  // Golub-Welsch on the probabilists' Hermite recurrence (weight e^{-x^2/2})
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(nodes, nodes);
  for (int k = 1; k < nodes; ++k) {
    double b = std::sqrt(double(k));
    j(k, k - 1) = j(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
  PriorModel p;
  p.theta.resize(nodes);
  p.weight.resize(nodes);
  for (int k = 0; k < nodes; ++k) {
    p.theta[k] = dtheta * es.eigenvalues()(k);
    double w0 = es.eigenvectors()(0, k);
    p.weight[k] = w0 * w0;
  }
  double s = 0;
  for (double w : p.weight) s += w;
  for (double& w : p.weight) w /= s;
  p.fisher = 1.0 / (dtheta * dtheta);
  p.second_moment = 0;
  for (int k = 0; k < nodes; ++k) p.second_moment += p.weight[k] * p.theta[k] * p.theta[k];
  return p;
}

PriorModel PriorModel::tabulated(std::vector<double> theta, std::vector<double> pdf) {
  if (theta.size() != pdf.size() || theta.size() < 8)
    throw std::invalid_argument("PriorModel: tabulated prior needs >= 8 matching nodes");
  PriorModel p;
  p.theta = std::move(theta);
  // trapezoid weights over the tabulated grid
  const size_t n = p.theta.size();
  p.weight.assign(n, 0.0);
  for (size_t k = 0; k + 1 < n; ++k) {
    double dx = p.theta[k + 1] - p.theta[k];
    p.weight[k] += 0.5 * dx * pdf[k];
    p.weight[k + 1] += 0.5 * dx * pdf[k + 1];
  }
  double s = 0;
  for (double w : p.weight) s += w;
  if (std::abs(s - 1.0) > 1e-8)
    throw std::invalid_argument("PriorModel: tabulated prior does not integrate to 1");
  for (double& w : p.weight) w /= s;
  double m1 = 0;
  p.second_moment = 0;
  for (size_t k = 0; k < n; ++k) {
    m1 += p.weight[k] * p.theta[k];
    p.second_moment += p.weight[k] * p.theta[k] * p.theta[k];
  }
  double var = p.second_moment - m1 * m1;
  p.fisher = var > 0 ? 1.0 / var : 0.0;
  return p;
}

BayesResult bayesian_improvement(const Mat& rho, const PriorModel& prior, int n_max) {
  const int M = n_max + 1;
  const long dim = static_cast<long>(M) * M;
  if (rho.rows() != dim) throw std::invalid_argument("bayesian_improvement: dimension mismatch");
  RVec jz(dim);
  for (int n1 = 0; n1 <= n_max; ++n1)
    for (int n2 = 0; n2 <= n_max; ++n2) jz(ops::fock_index(n1, n2, n_max)) = 0.5 * (n1 - n2);

  // rho_bar = int P rho_theta, rho_1 = int P rho_theta theta; rho_theta entries
  // pick up e^{-i theta (jz_a - jz_b)} since the generator is diagonal
  Mat rho_bar = Mat::Zero(dim, dim), rho_1 = Mat::Zero(dim, dim);
  for (size_t q = 0; q < prior.theta.size(); ++q) {
    double th = prior.theta[q], w = prior.weight[q];
    Mat rt(dim, dim);
    for (long a = 0; a < dim; ++a)
      for (long b = 0; b < dim; ++b) rt(a, b) = rho(a, b) * std::exp(-iu * (th * (jz(a) - jz(b))));
    rho_bar += w * rt;
    rho_1 += (w * th) * rt;
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (rho_bar + rho_bar.adjoint()));
  RVec lam = es.eigenvalues();
  Mat r1 = es.eigenvectors().adjoint() * rho_1 * es.eigenvectors();
  Mat s = Mat::Zero(dim, dim);
  for (long k = 0; k < dim; ++k)
    for (long l = 0; l < dim; ++l) {
      double denom = std::max(lam(k), 0.0) + std::max(lam(l), 0.0);
      if (denom > 1e-12) s(k, l) = 2.0 * r1(k, l) / denom;
    }
  // minimal posterior variance: <theta^2> - tr(rho_1 S)
  double tr = (r1 * s).trace().real();
  BayesResult out;
  out.posterior_var = prior.second_moment - tr;
  double gain = 1.0 / out.posterior_var - prior.fisher;
  out.dtheta_m = gain > 1e-12 ? 1.0 / std::sqrt(gain) : std::numeric_limits<double>::infinity();
  return out;
}

BayesResult bayesian_improvement(const Vec& pure, const PriorModel& prior, int n_max) {
  Mat rho = pure * pure.adjoint();
  return bayesian_improvement(rho, prior, n_max);
}

NoisyTrace noisy_energy_transfer(const TwoToneModel& model, double phi1, double phi2,
                                 const Vec& psi0, const NoiseSpec& noise, int trajectories,
                                 double horizon, int samples, int threads) {
  using Kind = NoiseSpec::Kind;
  if (trajectories < 1) throw std::invalid_argument("noisy_energy_transfer: trajectories >= 1");
  if (noise.kind == Kind::Dephasing &&
      (noise.axis.rows() != model.dim() || !ops::is_hermitian(noise.axis)))
    throw std::invalid_argument("noisy_energy_transfer: bad dephasing axis");
  if (threads <= 0) threads = default_threads();
  const double tcom = model.t_com();
  const double tau = noise.tau_over_tcom * tcom;
  const long steps = std::max<long>(1, std::lround(horizon / tau));
  const long stride = std::max<long>(1, steps / samples);
  const long nsamp = steps / stride + 1;

  std::vector<std::vector<double>> e1(trajectories), e2(trajectories), ph2(trajectories);
  parallel_for(trajectories, threads, [&](long traj) {
    std::mt19937_64 rng(splitmix64(noise.seed ^ (0x5151d00dULL + traj)));
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vec psi = psi0;
    double w1 = 0, w2 = 0, meander = 0;
    e1[traj].assign(nsamp, 0.0);
    e2[traj].assign(nsamp, 0.0);
    ph2[traj].assign(nsamp, 0.0);
    long snap = 1;
    for (long k = 0; k < steps; ++k) {
      double tm = (k + 0.5) * tau;
      double d1 = 0, d2 = 0;
      if (noise.kind == Kind::Frequency) {
        double dw = noise.strength * gauss(rng);
        meander += dw * tau;
        (noise.drive == 1 ? d1 : d2) = meander;
      }
      Mat h = model.hamiltonian(tm, phi1 + d1, phi2 + d2);
      if (noise.kind == Kind::Dephasing) h += (noise.strength * gauss(rng)) * noise.axis;
      Mat uh = floquet::hermitian_exp(h, 0.5 * tau);
      Vec mid = uh * psi;
      w1 += tau * (mid.adjoint() * model.drive_rate(1, tm, phi1 + d1, phi2 + d2) * mid)(0).real();
      w2 += tau * (mid.adjoint() * model.drive_rate(2, tm, phi1 + d1, phi2 + d2) * mid)(0).real();
      psi = uh * mid;
      if ((k + 1) % stride == 0 && snap < nsamp) {
        e1[traj][snap] = w1;
        e2[traj][snap] = w2;
        ph2[traj][snap] = meander * meander;
        ++snap;
      }
    }
  });

  NoisyTrace out;
  out.t.resize(nsamp);
  out.e1_mean.assign(nsamp, 0.0);
  out.e2_mean.assign(nsamp, 0.0);
  out.e1_sd.assign(nsamp, 0.0);
  out.e2_sd.assign(nsamp, 0.0);
  out.meander_sq.assign(nsamp, 0.0);
  for (long k = 0; k < nsamp; ++k) out.t[k] = k * stride * tau;
  for (int tr = 0; tr < trajectories; ++tr)
    for (long k = 0; k < nsamp; ++k) {
      out.e1_mean[k] += e1[tr][k];
      out.e2_mean[k] += e2[tr][k];
      out.meander_sq[k] += ph2[tr][k];
    }
  for (long k = 0; k < nsamp; ++k) {
    out.e1_mean[k] /= trajectories;
    out.e2_mean[k] /= trajectories;
    out.meander_sq[k] /= trajectories;
  }
  for (int tr = 0; tr < trajectories; ++tr)
    for (long k = 0; k < nsamp; ++k) {
      double a = e1[tr][k] - out.e1_mean[k], b = e2[tr][k] - out.e2_mean[k];
      out.e1_sd[k] += a * a;
      out.e2_sd[k] += b * b;
    }
  for (long k = 0; k < nsamp; ++k) {
    out.e1_sd[k] = std::sqrt(out.e1_sd[k] / std::max(1, trajectories - 1));
    out.e2_sd[k] = std::sqrt(out.e2_sd[k] / std::max(1, trajectories - 1));
  }
  return out;
}

double transfer_stop_time(const NoisyTrace& tr, double frac) {
  const size_t n = tr.t.size();
  if (n < 8) throw std::invalid_argument("transfer_stop_time: trace too short");
  // smoothed slope of E2 over a window of ~1/8 of the trace
  size_t w = std::max<size_t>(2, n / 16);
  auto slope = [&](size_t k) {
    size_t lo = k >= w ? k - w : 0, hi = std::min(n - 1, k + w);
    return (tr.e2_mean[hi] - tr.e2_mean[lo]) / (tr.t[hi] - tr.t[lo]);
  };
  double s0 = std::abs(slope(w));
  if (s0 == 0) return tr.t.back();
  for (size_t k = w; k < n; ++k)
    if (std::abs(slope(k)) < frac * s0) return tr.t[k];
  return tr.t.back();
}

DetunedSeries detuned_parity(const TwoToneModel& nominal, double delta_omega,
                             const lattice::FieldDistribution& f, const Vec& ancilla,
                             const std::vector<long>& ks, std::optional<double> theta,
                             const DetunedSeries* baseline, double depart_factor,
                             int steps_per_tcom, int threads) {
  if (threads <= 0) threads = default_threads();
  TwoToneModel detuned = nominal;
  detuned.omega1 = nominal.omega1 + delta_omega;
  detuned.omega2 = nominal.omega2 + delta_omega;
  detuned.com = floquet::commensurate(detuned.omega1, detuned.omega2);
  const double tcom = nominal.t_com();  // stroboscopic clock of the nominal model

  // evolve only cells carrying weight; one pass to the largest k, snapshots on the way
  const long npts = f.grid.num_points();
  std::vector<long> active;
  for (long idx = 0; idx < npts; ++idx)
    if (std::norm(f.amp[idx]) > 1e-16) active.push_back(idx);

  long kmax = *std::max_element(ks.begin(), ks.end());
  std::vector<std::vector<cxd>> snap(ks.size(), std::vector<cxd>(npts, cxd(0, 0)));

  const int d = nominal.dim();
  parallel_for(static_cast<long>(active.size()), threads, [&](long a) {
    long idx = active[a];
    int i1 = static_cast<int>(idx / f.grid.m), i2 = static_cast<int>(idx % f.grid.m);
    double p1 = f.grid.point(i1), p2 = f.grid.point(i2);
    Vec v = ancilla;
    double t = 0;
    const double dt = tcom / steps_per_tcom;
    for (long k = 1; k <= kmax; ++k) {
      for (int s = 0; s < steps_per_tcom; ++s) {
        double tm = t + (s + 0.5) * dt;
        v = floquet::hermitian_exp(detuned.hamiltonian(tm, p1, p2), dt) * v;
      }
      t += tcom;
      for (size_t q = 0; q < ks.size(); ++q)
        if (ks[q] == k) {
          cxd amp(0, 0);
          for (int l = 0; l < d; ++l) amp += std::conj(ancilla(l)) * v(l);
          snap[q][idx] = amp * f.amp[idx];
        }
    }
  });

  DetunedSeries out;
  out.ks = ks;
  out.delta_theta.resize(ks.size());
  for (size_t q = 0; q < ks.size(); ++q) {
    double n2 = 0;
    for (const cxd& aamp : snap[q]) n2 += std::norm(aamp);
    if (ks[q] == 0) {  // k=0 means the unevolved input
      out.delta_theta[q] = 1e6;
      continue;
    }
    for (cxd& aamp : snap[q]) aamp /= std::sqrt(n2);
    ops::TwoModeWave w;
    w.grid = f.grid;
    w.n1c = f.n1c;
    w.n2c = f.n2c;
    ops::phase_to_number(snap[q], w.amp, f.grid.m);
    ops::SwapSpectrum sp = ops::swap_spectrum(w);
    if (theta) {
      double fv = readout::fisher_at(sp, *theta);
      out.delta_theta[q] = fv > 1e-12 ? 1.0 / std::sqrt(fv) : 1e6;
    } else {
      std::vector<double> thetas(512);
      for (int i = 0; i < 512; ++i) thetas[i] = 2.0 * pi * i / 512;
      out.delta_theta[q] = readout::parity_curve(sp, thetas).best_delta_theta();
    }
  }
  if (baseline) {
    out.onset_k = double(ks.back());
    for (size_t q = 0; q < ks.size(); ++q)
      if (out.delta_theta[q] > depart_factor * baseline->delta_theta[q]) {
        out.onset_k = double(ks[q]);
        break;
      }
  }
  return out;
}

}  // namespace floqsens::channels
