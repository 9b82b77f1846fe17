#include "floqsens/readout.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace floqsens::readout {

namespace {

double fisher_value(double p, double dp, double ddp, const ParityOptions& opt, bool& flagged) {
  flagged = std::abs(p) > 1.0 - opt.singular_tol;
  if (!flagged) return dp * dp / (1.0 - p * p);
  // singular denominator; where the derivative also vanishes the quotient has
  // the finite limit |Pi''| (swap-symmetric states at theta = 0 and pi)
  if (std::abs(dp) < 1e-6 * std::max(1.0, std::abs(ddp))) return std::abs(ddp);
  return 0.0;
}

}  // namespace

ParityCurve parity_curve(const SwapSpectrum& sp, const std::vector<double>& thetas,
                         const ParityOptions& opt) {
  ParityCurve c;
  c.theta = thetas;
  c.parity.resize(thetas.size());
  c.dparity.resize(thetas.size());
  c.fisher.resize(thetas.size());
  c.delta_theta.resize(thetas.size());
  c.flagged.resize(thetas.size());
  for (size_t k = 0; k < thetas.size(); ++k) {
    cxd p = sp.parity(thetas[k]);
    cxd dp = sp.dparity(thetas[k]);
    cxd ddp = sp.ddparity(thetas[k]);
    c.parity[k] = p;
    c.dparity[k] = dp;
    bool fl;
    double f = fisher_value(p.real(), dp.real(), ddp.real(), opt, fl);
    c.flagged[k] = fl;
    c.fisher[k] = f;
    c.delta_theta[k] = f > opt.fisher_floor ? 1.0 / std::sqrt(f) : c.dtheta_cap;
    c.delta_theta[k] = std::min(c.delta_theta[k], c.dtheta_cap);
  }
  return c;
}

ParityCurve parity_curve(const TwoModeWave& w, int samples) {
  std::vector<double> thetas(samples);
  for (int k = 0; k < samples; ++k) thetas[k] = 2.0 * pi * k / samples;
  double n2 = w.norm2();
  if (std::abs(n2 - 1.0) > 1e-8) throw std::invalid_argument("parity_curve: state not normalized");
  return parity_curve(ops::swap_spectrum(w), thetas);
}

ParityCurve parity_curve_density(const Mat& rho, int n_max, int samples) {
  const int M = n_max + 1;
  if (rho.rows() != static_cast<long>(M) * M)
    throw std::invalid_argument("parity_curve_density: dimension mismatch");
  // tr(rho Pi_theta) = sum_{n1 n2} e^{i theta (n2 - n1)} <n1 n2| rho |n2 n1>
  ops::SwapSpectrum sp;
  sp.m = M;
  sp.s.assign(2 * M - 1, cxd(0, 0));
  for (int n1 = 0; n1 < M; ++n1)
    for (int n2 = 0; n2 < M; ++n2)
      sp.s[(n2 - n1) + M - 1] +=
          rho(static_cast<long>(n1) * M + n2, static_cast<long>(n2) * M + n1);
  std::vector<double> thetas(samples);
  for (int k = 0; k < samples; ++k) thetas[k] = 2.0 * pi * k / samples;
  return parity_curve(sp, thetas);
}

double fisher_at(const SwapSpectrum& sp, double theta, const ParityOptions& opt) {
  bool fl;
  return fisher_value(sp.parity(theta).real(), sp.dparity(theta).real(),
                      sp.ddparity(theta).real(), opt, fl);
}

double ParityCurve::best_delta_theta() const {
  double best = dtheta_cap;
  for (size_t k = 0; k < theta.size(); ++k)
    if (!flagged[k]) best = std::min(best, delta_theta[k]);
  return best;
}

void ParityCurve::write_csv(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("ParityCurve: cannot open " + path);
  f << "theta_tilde,parity_re,parity_im,dparity,fisher,delta_theta,flag\n";
  char buf[256];
  for (size_t k = 0; k < theta.size(); ++k) {
    std::snprintf(buf, sizeof(buf), "%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%d\n", theta[k],
                  parity[k].real(), parity[k].imag(), dparity[k].real(), fisher[k],
                  delta_theta[k], flagged[k] ? 1 : 0);
    f << buf;
  }
}

ScalingFit fit_loglog(const std::vector<long>& ks, const std::vector<double>& dts) {
  ScalingFit fit;
  fit.ks = ks;
  fit.delta_theta = dts;
  const size_t n = ks.size();
  if (n < 2) throw std::invalid_argument("fit_loglog: at least two samples required");
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (size_t k = 0; k < n; ++k) {
    double x = std::log(double(ks[k])), y = std::log(dts[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
  }
  double denom = n * sxx - sx * sx;
  fit.exponent = (n * sxy - sx * sy) / denom;
  double ss_tot = syy - sy * sy / n;
  double b = (sy - fit.exponent * sx) / n;
  double ss_res = 0;
  for (size_t k = 0; k < n; ++k) {
    double r = std::log(dts[k]) - (fit.exponent * std::log(double(ks[k])) + b);
    ss_res += r * r;
  }
  fit.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

ScalingFit sensitivity_scaling(const FloquetSpectrum& s, const FieldDistribution& f,
                               const Vec& ancilla, const std::vector<long>& ks,
                               std::optional<double> theta, const ParityOptions& opt) {
  if (ks.size() < 5)
    throw std::invalid_argument("sensitivity_scaling: at least 5 stroboscopic times");
  std::vector<double> dts;
  dts.reserve(ks.size());
  const double cap = 1e6;
  for (long k : ks) {
    TwoModeWave w = lattice::pes_at(s, f, ancilla, k);
    ops::SwapSpectrum sp = ops::swap_spectrum(w);
    double dt;
    if (theta) {
      double fv = fisher_at(sp, *theta, opt);
      dt = fv > opt.fisher_floor ? 1.0 / std::sqrt(fv) : cap;
    } else {
      std::vector<double> thetas(opt.samples);
      for (int i = 0; i < opt.samples; ++i) thetas[i] = 2.0 * pi * i / opt.samples;
      dt = parity_curve(sp, thetas, opt).best_delta_theta();
    }
    dts.push_back(std::min(dt, cap));
  }
  return fit_loglog(ks, dts);
}

// ---------------------------------------------------------------------------
// Characteristic-function classifier
// ---------------------------------------------------------------------------

double Band1D::eps_at(double dphi, int n) const {
  double x = dphi / (2.0 * pi / m);
  double fl = std::floor(x);
  int k = static_cast<int>(fl) % m;
  if (k < 0) k += m;
  int k2 = (k + 1) % m;
  double frac = x - fl;
  double e0 = eps[k * d + n];
  double de = fold_interval(eps[k2 * d + n] - e0, omega_com);
  return fold_interval(e0 + frac * de, omega_com);
}

double Band1D::deps_at(double dphi, int n) const {
  double x = dphi / (2.0 * pi / m);
  double fl = std::floor(x);
  int k = static_cast<int>(fl) % m;
  if (k < 0) k += m;
  int k2 = (k + 1) % m;
  double frac = x - fl;
  return (1 - frac) * deps[k * d + n] + frac * deps[k2 * d + n];
}

double Band1D::ddeps_at(double dphi, int n) const {
  double h = 2.0 * pi / m;
  return (deps_at(dphi + h, n) - deps_at(dphi - h, n)) / (2.0 * h);
}

Band1D band_cut(const FloquetSpectrum& s) {
  Band1D b;
  b.m = s.grid.m;
  b.d = s.d;
  b.omega = s.omega1;
  b.omega_com = s.omega_com;
  b.eps.resize(static_cast<size_t>(b.m) * b.d);
  b.deps.resize(static_cast<size_t>(b.m) * b.d);
  for (int k = 0; k < b.m; ++k) {
    long idx = s.grid.index(k, 0);
    for (int n = 0; n < b.d; ++n) {
      b.eps[k * b.d + n] = s.eps[idx * s.d + n];
      b.deps[k * b.d + n] = s.deps1[idx * s.d + n];  // d/d(dphi) along the cut
    }
  }
  return b;
}

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::DegenerateSensitive: return "degenerate-sensitive";
    case Verdict::NonDegenerate: return "non-degenerate";
    case Verdict::Insensitive: return "insensitive";
    case Verdict::NoSubSql: return "no-sub-sql";
  }
  return "?";
}

bool Support::contains(double dphi) const {
  double x = dphi - 2.0 * pi * std::floor(dphi / (2.0 * pi));
  for (const auto& [lo, hi] : intervals) {
    if (lo <= hi) {
      if (x >= lo && x <= hi) return true;
    } else {
      if (x >= lo || x <= hi) return true;  // wrapped interval
    }
  }
  return false;
}

Support Support::full() {
  Support s;
  s.intervals.push_back({0.0, 2.0 * pi});
  return s;
}

Support Support::cell(double dphi, double width) {
  double x = dphi - 2.0 * pi * std::floor(dphi / (2.0 * pi));
  Support s;
  double lo = x - width / 2, hi = x + width / 2;
  if (lo < 0) lo += 2 * pi;
  if (hi >= 2 * pi) hi -= 2 * pi;
  s.intervals.push_back({lo, hi});
  return s;
}

Support field_support(const FieldDistribution& f, double weight_cut) {
  using Kind = FieldDistribution::Kind;
  if (f.kind == Kind::FockUniform) return Support::full();
  if (f.kind == Kind::CoherentDelta)
    // the delta support is read as the grid cell around dphi0
    return Support::cell(f.phi10 - f.phi20, f.grid.spacing());
  // wavepackets and custom fields: marginal weight over dphi above the cut
  const int m = f.grid.m;
  std::vector<double> wd(m, 0.0);
  for (int i1 = 0; i1 < m; ++i1)
    for (int i2 = 0; i2 < m; ++i2) wd[f.grid.wrap(i1 - i2)] += std::norm(f.amp[f.grid.index(i1, i2)]);
  double wmax = *std::max_element(wd.begin(), wd.end());
  std::vector<bool> above(m);
  int anchor = -1;
  for (int k = 0; k < m; ++k) {
    above[k] = wd[k] > weight_cut * wmax;
    if (!above[k]) anchor = k;
  }
  if (anchor < 0) return Support::full();
  // walk one full cycle starting after an empty cell, collecting runs
  Support s;
  int start = -1;
  for (int off = 1; off <= m; ++off) {
    int k = (anchor + off) % m;
    if (above[k] && start < 0) start = k;
    if ((!above[k] || off == m) && start >= 0) {
      int last = above[k] ? k : (k - 1 + m) % m;
      double lo = f.grid.point(start);
      double hi = f.grid.point(last) + f.grid.spacing();
      s.intervals.push_back({lo, std::fmod(hi, 2 * pi)});
      start = -1;
    }
  }
  if (s.intervals.empty()) return Support::full();
  return s;
}

CharacteristicProfile classify_critical_points(const Band1D& bands, double theta,
                                               const Support& support,
                                               const ClassifierOptions& opt_in) {
  ClassifierOptions opt = opt_in;
  const double wcom = bands.omega_com;
  if (opt.tol2 <= 0) opt.tol2 = 1e-3 * wcom * wcom / (4.0 * pi * pi);
  if (opt.tol_theta <= 0) opt.tol_theta = 1e-6 * wcom;
  const double w = bands.omega;
  const double s2w = std::sqrt(2.0) * w;

  CharacteristicProfile prof;
  const int nref = bands.m * std::max(1, opt.refine);
  const double h = 2.0 * pi / nref;

  auto partner = [&](double x) { return -x + 2.0 * theta; };
  // derivatives in the x_tilde = dphi/(sqrt2 w) convention of the conditions
  auto dG = [&](int n, int mb, double x) {
    return s2w * (bands.deps_at(x, n) + bands.deps_at(partner(x), mb));
  };
  auto d2G = [&](int n, int mb, double x) {
    return 2.0 * w * w * (bands.ddeps_at(x, n) - bands.ddeps_at(partner(x), mb));
  };
  auto dThetaG = [&](int n, int mb, double x) {
    return -2.0 * bands.deps_at(partner(x), mb);
  };
  auto Gval = [&](int n, int mb, double x) {
    return fold_interval(bands.eps_at(x, n) - bands.eps_at(partner(x), mb), wcom);
  };
  auto both_in_support = [&](double x) {
    return support.contains(x) && support.contains(partner(x));
  };

  bool any_deg_sens = false, any_nondeg_sens = false;
  for (int n = 0; n < bands.d; ++n)
    for (int mb = 0; mb < bands.d; ++mb) {
      // symmetric-band special case: G vanishes identically on the support
      double gmax = 0;
      bool any_support = false;
      for (int k = 0; k < nref; ++k) {
        double x = k * h;
        if (!both_in_support(x)) continue;
        any_support = true;
        gmax = std::max(gmax, std::abs(Gval(n, mb, x)));
      }
      if (!any_support) continue;
      if (gmax < 1e-5 * wcom) {
        prof.degenerate_everywhere = true;
        double tmax = 0;
        for (int k = 0; k < nref; ++k) {
          double x = k * h;
          if (!both_in_support(x)) continue;
          tmax = std::max(tmax, std::abs(dThetaG(n, mb, x)));
        }
        CriticalPoint cp;
        cp.n = n;
        cp.m_band = mb;
        cp.degenerate = true;
        cp.sensitive = tmax > opt.tol_theta;
        cp.in_support = true;
        cp.gt = tmax;
        prof.points.push_back(cp);
        if (cp.sensitive) any_deg_sens = true;
        continue;
      }
      // root scan of dG: sign changes bisected, near-zero plateaus kept as-is
      double dscale = 0;
      for (int k = 0; k < nref; ++k) dscale = std::max(dscale, std::abs(dG(n, mb, k * h)));
      if (dscale == 0) continue;
      double plateau_cut = 1e-2 * dscale;
      for (int k = 0; k < nref; ++k) {
        double x0 = k * h, x1 = (k + 1) * h;
        double g0 = dG(n, mb, x0), g1 = dG(n, mb, x1);
        double root = std::numeric_limits<double>::quiet_NaN();
        if (std::abs(g0) <= plateau_cut)
          root = x0;
        else if (g0 * g1 < 0) {
          double a = x0, b = x1;
          for (int it = 0; it < 60; ++it) {
            double mid = 0.5 * (a + b);
            if (dG(n, mb, a) * dG(n, mb, mid) <= 0)
              b = mid;
            else
              a = mid;
          }
          root = 0.5 * (a + b);
        }
        if (!std::isfinite(root)) continue;
        CriticalPoint cp;
        cp.x0 = root;
        cp.n = n;
        cp.m_band = mb;
        cp.g2 = d2G(n, mb, root);
        cp.gt = dThetaG(n, mb, root);
        cp.degenerate = std::abs(cp.g2) < opt.tol2;
        cp.sensitive = std::abs(cp.gt) > opt.tol_theta;
        cp.in_support = both_in_support(root);
        // keep the list small: only roots inside the support are decisive
        if (cp.in_support) {
          prof.points.push_back(cp);
          if (cp.degenerate && cp.sensitive) any_deg_sens = true;
          if (!cp.degenerate && cp.sensitive) any_nondeg_sens = true;
        }
      }
    }

  if (any_deg_sens)
    prof.verdict = Verdict::DegenerateSensitive;
  else if (any_nondeg_sens)
    prof.verdict = Verdict::NonDegenerate;
  else
    prof.verdict = Verdict::Insensitive;
  return prof;
}

CharacteristicProfile classify(const FloquetSpectrum& s, double theta, const Support& support,
                               const ClassifierOptions& opt) {
  if (std::abs(s.omega1 - s.omega2) > 1e-12 * std::max(s.omega1, s.omega2)) {
    // unequal drive frequencies: the general characteristic functions admit no
    // degenerate stationary phase with nonzero theta response
    CharacteristicProfile prof;
    prof.verdict = Verdict::NoSubSql;
    prof.note = "unequal drive frequencies";
    return prof;
  }
  return classify_critical_points(band_cut(s), theta, support, opt);
}

}  // namespace floqsens::readout
