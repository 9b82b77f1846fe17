#include "floqsens/experiments.hpp"

#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>

namespace floqsens::cli {

using floquet::FloquetSpectrum;
using floquet::TwoToneModel;
using lattice::FieldDistribution;
using nlohmann::json;

std::string version_string() { return "floqsens 0.1.0"; }

TwoToneModel build_model(const RunConfig& c) {
  std::map<std::string, double> p = c.model_params;
  // desk defaults per gallery model
  auto put = [&](const std::string& k, double v) {
    if (!p.count(k)) p[k] = v;
  };
  if (c.model_name == "circular") {
    put("omega0", 1.0);
    put("omega", 0.25);
    put("amplitude", 0.125);
  } else if (c.model_name == "polarization" || c.model_name == "specific") {
    put("omega0", 1.0);
    put("omega", 1.0);
    put("amplitude", 0.5);
  } else if (c.model_name == "zeeman") {
    put("g", 1.0);
    put("b0", 1.0);
    put("omega1", 1.0);
  } else if (c.model_name == "qutrit") {
    put("omega", 1.0);
  }
  return floquet::model_library(c.model_name, p);
}

FieldDistribution build_field(const RunConfig& c, const ops::PhaseGrid& grid) {
  if (c.input_kind == "fock") return lattice::fock_uniform(grid, c.n_c, c.n_c);
  return lattice::coherent_wavepacket(grid, c.n_c, c.n_c, c.phi10, c.phi20);
}

Vec build_ancilla(const FloquetSpectrum& s, const FieldDistribution& f,
                  const std::vector<double>& betas, bool* zero_power) {
  lattice::FunctionalPowerOperator p = lattice::functional_power(s, f, 1);
  if (zero_power) *zero_power = p.zero_power;
  if (p.zero_power) {
    Vec v = Vec::Constant(s.d, cxd(1.0 / std::sqrt(double(s.d)), 0));
    return v;
  }
  std::vector<double> b = betas;
  b.resize(p.free_phase_count(), 0.0);
  return lattice::ancilla_state(p, b);
}

namespace {

double extra_or(const RunConfig& c, const std::string& key, double dflt) {
  auto it = c.extra.find(key);
  return it == c.extra.end() ? dflt : it->second;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

struct Sink {
  const RunConfig& cfg;
  json results;
  std::vector<std::string> artifacts;
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

  std::string path(const std::string& name) const {
    return (std::filesystem::path(cfg.out_dir) / name).string();
  }
  void add(const std::string& name) { artifacts.push_back(name); }
  void manifest() {
    json m;
    m["config_hash"] = fnv1a(cfg.canonical());
    m["version"] = version_string();
    m["experiment"] = cfg.experiment;
    m["seed"] = cfg.seed;
    m["wall_ms"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0)
            .count();
    m["artifacts"] = artifacts;
    m["results"] = results;
    std::ofstream f(path("manifest.json"));
    f << m.dump(2) << "\n";
  }
};

std::vector<double> beta_list(const RunConfig& c) {
  std::vector<double> b;
  for (int k = 0;; ++k) {
    auto it = c.extra.find("beta" + (k ? std::to_string(k) : std::string()));
    if (it == c.extra.end()) break;
    b.push_back(it->second);
  }
  if (b.empty() && c.extra.count("beta")) b.push_back(c.extra.at("beta"));
  return b;
}

std::vector<long> default_tlist(const RunConfig& c, std::initializer_list<long> dflt) {
  return c.t_list.empty() ? std::vector<long>(dflt) : c.t_list;
}

void write_rows_csv(const std::string& path, const std::string& header,
                    const std::vector<std::vector<double>>& rows) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  f << header << "\n";
  char buf[64];
  for (const auto& r : rows) {
    for (size_t k = 0; k < r.size(); ++k) {
      std::snprintf(buf, sizeof(buf), "%.12g", r[k]);
      f << buf << (k + 1 < r.size() ? "," : "");
    }
    f << "\n";
  }
}

// ---------------------------------------------------------------------------

void run_bands(const RunConfig& c, Sink& sink) {
  TwoToneModel model = build_model(c);
  FloquetSpectrum s =
      floquet::quasienergies(model, ops::PhaseGrid(c.grid), c.steps_per_tcom, c.threads);
  if (s.tracking_ambiguous) sink.results["tracking_ambiguous"] = true;
  floquet::write_spectrum_csv(s, sink.path("spectrum.csv"));
  sink.add("spectrum.csv");
  floquet::PowerIdentity id = floquet::power_identity(s);
  sink.results["max_trace"] = id.max_trace;
  sink.results["max_energy_conservation"] = id.max_energy_conservation;
}

void run_power(const RunConfig& c, Sink& sink) {
  TwoToneModel model = build_model(c);
  ops::PhaseGrid grid(c.grid);
  FloquetSpectrum s = floquet::quasienergies(model, grid, c.steps_per_tcom, c.threads);
  FieldDistribution f = build_field(c, grid);
  std::vector<std::vector<double>> rows;
  for (int drive : {1, 2}) {
    lattice::FunctionalPowerOperator p = lattice::functional_power(s, f, drive);
    for (int n = 0; n < p.eigvals.size(); ++n)
      rows.push_back({double(drive), double(n), p.eigvals(n)});
    if (drive == 1) sink.results["zero_power"] = p.zero_power;
  }
  write_rows_csv(sink.path("power.csv"), "drive,index,eigenvalue", rows);
  sink.add("power.csv");
  floquet::PowerIdentity id = floquet::power_identity(s);
  sink.results["max_trace"] = id.max_trace;
  sink.results["max_energy_conservation"] = id.max_energy_conservation;
}

void run_evolve(const RunConfig& c, Sink& sink) {
  TwoToneModel model = build_model(c);
  ops::PhaseGrid grid(c.grid);
  FloquetSpectrum s = floquet::quasienergies(model, grid, c.steps_per_tcom, c.threads);
  FieldDistribution f = build_field(c, grid);
  bool zero = false;
  Vec anc = build_ancilla(s, f, beta_list(c), &zero);
  sink.results["zero_power"] = zero;
  std::vector<std::vector<double>> rows;
  for (long k : default_tlist(c, {0, 10, 20, 30})) {
    lattice::LatticeState st = lattice::evolve_lattice(s, f, anc, k);
    // second-mode marginal over absolute occupations, all qudit levels traced
    std::vector<double> prob(grid.m, 0.0);
    std::vector<cxd> tmp, num;
    for (int l = 0; l < st.d; ++l) {
      tmp.assign(st.amp.begin() + l * grid.num_points(),
                 st.amp.begin() + (l + 1) * grid.num_points());
      ops::phase_to_number(tmp, num, grid.m);
      for (int i1 = 0; i1 < grid.m; ++i1)
        for (int i2 = 0; i2 < grid.m; ++i2) prob[i2] += std::norm(num[grid.index(i1, i2)]);
    }
    for (int i2 = 0; i2 < grid.m; ++i2)
      rows.push_back({double(k), double(f.n2c + grid.rel_n(i2)), prob[i2]});
  }
  write_rows_csv(sink.path("profile.csv"), "T,n2,probability", rows);
  sink.add("profile.csv");
}

void run_qfi(const RunConfig& c, Sink& sink) {
  TwoToneModel model = build_model(c);
  ops::PhaseGrid grid(c.grid);
  FloquetSpectrum s = floquet::quasienergies(model, grid, c.steps_per_tcom, c.threads);
  FieldDistribution f = build_field(c, grid);
  bool zero = false;
  Vec anc = build_ancilla(s, f, beta_list(c), &zero);
  // band quadratures use the delta idealization for coherent inputs
  FieldDistribution fq = c.input_kind == "coherent"
                             ? lattice::coherent_delta(grid, c.phi10, c.phi20, c.n_c, c.n_c)
                             : f;
  metrology::QfiBound bound = s.d == 2 ? metrology::qfi_bound(s, fq) : metrology::QfiBound{};
  double qb = s.d == 2 ? metrology::q_bound(s, fq) : 0.0;
  metrology::SensingReport rep;
  rep.model = c.model_name;
  rep.input = c.input_kind;
  rep.q_window = qb;
  for (long k : default_tlist(c, {1, 2, 4, 8, 16, 24, 32, 40})) {
    double t_abs = k * s.t_com;
    double succ = 0;
    ops::TwoModeWave w = lattice::pes_at(s, f, anc, k, &succ);
    rep.t_over_tcom.push_back(double(k));
    rep.qfi.push_back(metrology::qfi_pure_jz(w));
    rep.bound_lo.push_back(bound.lo() * t_abs * t_abs);
    rep.bound_hi.push_back(bound.hi() * t_abs * t_abs);
    rep.mean_jz.push_back(ops::jz_moments(w).mean);
    rep.witness_k.push_back(metrology::entanglement_witness(w).k);
  }
  rep.write_csv(sink.path("sensing.csv"));
  rep.write_json(sink.path("sensing.json"));
  sink.add("sensing.csv");
  sink.add("sensing.json");
  sink.results["p2f"] = bound.p2;
  sink.results["zero_power"] = zero;
}

void run_parity(const RunConfig& c, Sink& sink) {
  TwoToneModel model = build_model(c);
  ops::PhaseGrid grid(c.grid);
  FloquetSpectrum s = floquet::quasienergies(model, grid, c.steps_per_tcom, c.threads);
  FieldDistribution f = build_field(c, grid);
  Vec anc = build_ancilla(s, f, beta_list(c));
  long k = default_tlist(c, {32}).back();
  double succ = 0;
  ops::TwoModeWave w = lattice::pes_at(s, f, anc, k, &succ);
  readout::ParityCurve curve =
      readout::parity_curve(w, static_cast<int>(extra_or(c, "samples", 512)));
  curve.write_csv(sink.path("parity.csv"));
  sink.add("parity.csv");
  sink.results["success"] = succ;
  sink.results["best_delta_theta"] = curve.best_delta_theta();
}

void run_scaling(const RunConfig& c, Sink& sink) {
  TwoToneModel model = build_model(c);
  ops::PhaseGrid grid(c.grid);
  FloquetSpectrum s = floquet::quasienergies(model, grid, c.steps_per_tcom, c.threads);
  FieldDistribution f = build_field(c, grid);
  Vec anc = build_ancilla(s, f, beta_list(c));
  std::vector<long> ks = default_tlist(c, {8, 12, 16, 24, 32, 44});
  readout::ScalingFit fit = readout::sensitivity_scaling(s, f, anc, ks, c.theta);
  std::vector<std::vector<double>> rows;
  for (size_t q = 0; q < ks.size(); ++q)
    rows.push_back({double(ks[q]), fit.delta_theta[q]});
  write_rows_csv(sink.path("scaling.csv"), "T,delta_theta", rows);
  sink.add("scaling.csv");
  sink.results["exponent"] = fit.exponent;
  sink.results["r2"] = fit.r2;
  // classifier verdict at the evaluation angle (or 0)
  readout::CharacteristicProfile prof =
      readout::classify(s, c.theta.value_or(0.0), readout::field_support(f));
  sink.results["verdict"] = readout::verdict_name(prof.verdict);
}

void run_loss(const RunConfig& c, Sink& sink) {
  int n = static_cast<int>(extra_or(c, "n_photons", 12));
  std::vector<double> etas;
  double lo = extra_or(c, "eta_min", 0.5), hi = extra_or(c, "eta_max", 1.0);
  int steps = static_cast<int>(extra_or(c, "eta_steps", 11));
  for (int k = 0; k < steps; ++k) etas.push_back(lo + (hi - lo) * k / (steps - 1));
  std::vector<std::vector<double>> rows;
  Vec noon = metrology::noon_state(n);
  Vec tf = metrology::twin_fock_state(n);
  for (const auto& [tag, st] : {std::pair<double, Vec>{0.0, noon}, {1.0, tf}}) {
    std::vector<channels::LossPoint> sweep = channels::loss_sweep(st, n, etas);
    for (const auto& p : sweep)
      rows.push_back({tag, p.eta, p.qfi, p.dtheta_qfi, p.dtheta_parity});
  }
  write_rows_csv(sink.path("loss.csv"), "state,eta,qfi,dtheta_qfi,dtheta_parity", rows);
  sink.add("loss.csv");
  sink.results["sql_dtheta"] = 1.0 / std::sqrt(double(n));
}

void run_bayes(const RunConfig& c, Sink& sink) {
  int n = static_cast<int>(extra_or(c, "n_photons", 12));
  int nodes = static_cast<int>(extra_or(c, "nodes", 64));
  std::vector<std::vector<double>> rows;
  Vec noon = metrology::noon_state(n);
  Vec tf = metrology::twin_fock_state(n);
  double lo = extra_or(c, "dtheta_min", 0.02), hi = extra_or(c, "dtheta_max", 0.5);
  int steps = static_cast<int>(extra_or(c, "dtheta_steps", 13));
  for (int k = 0; k < steps; ++k) {
    double dth = lo * std::pow(hi / lo, double(k) / (steps - 1));
    channels::PriorModel prior = channels::PriorModel::gaussian(dth, nodes);
    channels::BayesResult a = channels::bayesian_improvement(noon, prior, n);
    channels::BayesResult b = channels::bayesian_improvement(tf, prior, n);
    rows.push_back({dth, a.dtheta_m, b.dtheta_m});
  }
  write_rows_csv(sink.path("bayes.csv"), "delta_theta_prior,dtheta_m_noon,dtheta_m_twinfock",
                 rows);
  sink.add("bayes.csv");
  sink.results["sql_dtheta"] = 1.0 / std::sqrt(double(n));
}

void run_noise(const RunConfig& c, Sink& sink) {
  TwoToneModel model = build_model(c);
  channels::NoiseSpec spec;
  spec.kind = extra_or(c, "kind", 0) < 0.5 ? channels::NoiseSpec::Kind::Dephasing
                                           : channels::NoiseSpec::Kind::Frequency;
  spec.axis = model.h0.cwiseAbs().maxCoeff() > 0 ? model.h0 / model.h0.cwiseAbs().maxCoeff()
                                                 : ops::sigma_z();
  spec.seed = c.seed;
  spec.tau_over_tcom = extra_or(c, "tau_over_tcom", 1e-3);
  int traj = static_cast<int>(extra_or(c, "trajectories", 64));
  double horizon = extra_or(c, "horizon_tcom", 20) * model.t_com();
  Vec psi0 = Vec::Zero(model.dim());
  psi0(0) = 1;
  std::vector<double> strengths;
  for (int k = 0; k < 8; ++k) {
    auto it = c.extra.find("s" + std::to_string(k));
    if (it != c.extra.end()) strengths.push_back(it->second);
  }
  if (strengths.empty()) strengths = {0.0, 0.5, 1.0, 2.0};
  std::vector<std::vector<double>> rows;
  json stops = json::array();
  for (double s : strengths) {
    channels::NoiseSpec ns = spec;
    ns.strength = s;
    channels::NoisyTrace tr = channels::noisy_energy_transfer(model, c.phi10, c.phi20, psi0, ns,
                                                              traj, horizon, 256, c.threads);
    for (size_t k = 0; k < tr.t.size(); ++k)
      rows.push_back({s, tr.t[k], tr.e1_mean[k], tr.e2_mean[k], tr.e1_sd[k], tr.e2_sd[k],
                      tr.meander_sq[k]});
    stops.push_back({{"strength", s}, {"stop_time", channels::transfer_stop_time(tr)}});
  }
  write_rows_csv(sink.path("noise.csv"), "strength,t,e1_mean,e2_mean,e1_sd,e2_sd,meander_sq",
                 rows);
  sink.add("noise.csv");
  sink.results["stop_times"] = stops;
}

void run_detune(const RunConfig& c, Sink& sink) {
  TwoToneModel model = build_model(c);
  ops::PhaseGrid grid(c.grid);
  FloquetSpectrum s = floquet::quasienergies(model, grid, c.steps_per_tcom, c.threads);
  FieldDistribution f = build_field(c, grid);
  Vec anc = build_ancilla(s, f, beta_list(c));
  std::vector<long> ks = default_tlist(c, {2, 4, 8, 12, 16, 24, 32});
  std::vector<double> dws;
  for (int k = 0; k < 8; ++k) {
    auto it = c.extra.find("d" + std::to_string(k));
    if (it != c.extra.end()) dws.push_back(it->second);
  }
  if (dws.empty()) dws = {0.01, 0.02, 0.04, 0.06};
  channels::DetunedSeries base = channels::detuned_parity(model, 0.0, f, anc, ks, c.theta,
                                                          nullptr, 2.0, c.steps_per_tcom,
                                                          c.threads);
  std::vector<std::vector<double>> rows;
  for (size_t q = 0; q < ks.size(); ++q) rows.push_back({0.0, double(ks[q]), base.delta_theta[q]});
  json onsets = json::array();
  for (double dw : dws) {
    channels::DetunedSeries ser = channels::detuned_parity(
        model, dw * model.omega1, f, anc, ks, c.theta, &base, 2.0, c.steps_per_tcom, c.threads);
    for (size_t q = 0; q < ks.size(); ++q)
      rows.push_back({dw, double(ks[q]), ser.delta_theta[q]});
    onsets.push_back({{"delta_omega", dw}, {"onset_k", ser.onset_k}});
  }
  write_rows_csv(sink.path("detune.csv"), "delta_omega,T,delta_theta", rows);
  sink.add("detune.csv");
  sink.results["onsets"] = onsets;
}

void run_optimize(const RunConfig& c, Sink& sink) {
  TwoToneModel model = build_model(c);
  ops::PhaseGrid grid(c.grid);
  FloquetSpectrum s = floquet::quasienergies(model, grid, c.steps_per_tcom, c.threads);
  FieldDistribution f = build_field(c, grid);
  lattice::FunctionalPowerOperator p = lattice::functional_power(s, f, 2);
  metrology::OptimizeConfig oc;
  oc.grid_points = static_cast<int>(extra_or(c, "beta_grid", 32));
  oc.k_strob = default_tlist(c, {10}).back();
  oc.threads = c.threads;
  metrology::OptimizeResult res = metrology::optimize_ancilla_phases(s, f, p, oc);
  std::vector<std::vector<double>> rows;
  if (res.free_phases == 2) {
    for (int i = 0; i < oc.grid_points; ++i)
      for (int j = 0; j < oc.grid_points; ++j)
        rows.push_back({2 * pi * i / oc.grid_points, 2 * pi * j / oc.grid_points,
                        res.landscape[static_cast<long>(i) * oc.grid_points + j]});
    write_rows_csv(sink.path("landscape.csv"), "beta1,beta2,qfi_per_t2", rows);
  } else {
    for (long k = 0; k < static_cast<long>(res.landscape.size()); ++k)
      rows.push_back({2 * pi * k / oc.grid_points, res.landscape[k]});
    write_rows_csv(sink.path("landscape.csv"), "beta1,qfi_per_t2", rows);
  }
  sink.add("landscape.csv");
  sink.results["best_qfi_per_t2"] = res.best_qfi_per_t2;
  sink.results["min_qfi_per_t2"] = res.min_qfi_per_t2;
  sink.results["flat"] = res.flat;
}

void run_validate(const RunConfig& c, Sink& sink) {
  TwoToneModel model = build_model(c);
  ops::PhaseGrid grid(c.grid);
  FloquetSpectrum s = floquet::quasienergies(model, grid, c.steps_per_tcom, c.threads);
  FieldDistribution f = build_field(c, grid);
  Vec anc = build_ancilla(s, f, beta_list(c));
  int n_max = c.truncation > 0 ? c.truncation : fock::default_n_max(c.n_c);
  fock::QuantizedModel qm = fock::quantize(model, c.n_c, c.n_c, n_max);
  fock::InputKind kind =
      c.input_kind == "fock" ? fock::InputKind::Fock : fock::InputKind::Coherent;
  fock::FockState st = fock::drive_input(kind, c.n_c, c.n_c, c.phi10, c.phi20, n_max, anc);
  std::vector<std::vector<double>> rows;
  double max_dev = 0;
  double t_prev = 0;
  for (long k : default_tlist(c, {1, 2, 3, 4, 6, 8, 10, 12})) {
    double t_abs = k * s.t_com;
    st = fock::evolve_fock(qm, st, t_abs - t_prev);
    t_prev = t_abs;
    fock::PesFockResult pes = fock::pes_fock(st, anc);
    double f_fock = metrology::qfi_pure_jz_fock(n_max, pes.amp);
    ops::TwoModeWave w = lattice::pes_at(s, f, anc, k);
    double f_latt = metrology::qfi_pure_jz(w);
    double dev = std::abs(std::sqrt(f_fock) - std::sqrt(f_latt)) /
                 std::max(std::sqrt(f_latt), 1e-12);
    max_dev = std::max(max_dev, dev);
    rows.push_back({double(k), std::sqrt(f_latt), std::sqrt(f_fock), dev});
  }
  write_rows_csv(sink.path("validate.csv"), "T,sqrt_qfi_lattice,sqrt_qfi_fock,rel_dev", rows);
  sink.add("validate.csv");
  sink.results["max_rel_dev"] = max_dev;
}

}  // namespace

RunOutcome run_experiment(const RunConfig& c) {
  RunOutcome out;
  Sink sink{c};
  std::error_code ec;
  std::filesystem::create_directories(c.out_dir, ec);
  try {
    if (c.experiment == "bands") run_bands(c, sink);
    else if (c.experiment == "power") run_power(c, sink);
    else if (c.experiment == "evolve") run_evolve(c, sink);
    else if (c.experiment == "qfi") run_qfi(c, sink);
    else if (c.experiment == "parity") run_parity(c, sink);
    else if (c.experiment == "scaling") run_scaling(c, sink);
    else if (c.experiment == "loss") run_loss(c, sink);
    else if (c.experiment == "bayes") run_bayes(c, sink);
    else if (c.experiment == "noise") run_noise(c, sink);
    else if (c.experiment == "detune") run_detune(c, sink);
    else if (c.experiment == "optimize") run_optimize(c, sink);
    else if (c.experiment == "validate") run_validate(c, sink);
    else throw ConfigError("unknown experiment " + c.experiment);
  } catch (const ConfigError& e) {
    out.exit_code = kExitConfig;
    out.message = e.what();
    return out;
  } catch (const fock::TruncationBreach& e) {
    out.exit_code = kExitBreach;
    out.message = e.what();
    return out;
  } catch (const std::invalid_argument& e) {
    out.exit_code = kExitConfig;
    out.message = e.what();
    return out;
  }
  sink.manifest();
  out.artifacts = sink.artifacts;
  out.artifacts.push_back("manifest.json");
  return out;
}

}  // namespace floqsens::cli
