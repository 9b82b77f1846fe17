#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace floqsens::cli {

// Declarative run configuration. Units: energies in omega0 = 1, times in
// T_com, angles in radians. Unknown keys anywhere in the file are rejected.
struct RunConfig {
  std::string experiment;  // bands, power, evolve, qfi, parity, scaling, loss,
                           // bayes, noise, detune, optimize, validate
  std::string model_name;
  std::map<std::string, double> model_params;

  std::string input_kind = "fock";  // fock | coherent
  int n_c = 25;
  double phi10 = 0.0, phi20 = 0.0;

  int grid = 128;
  int steps_per_tcom = 2000;
  std::vector<long> t_list;   // stroboscopic multiples of T_com
  int truncation = 0;         // fock n_max; 0 = default margin rule
  std::optional<double> theta;
  std::uint64_t seed = 1;
  int threads = 0;
  std::string out_dir = ".";

  // per-experiment knobs
  std::map<std::string, double> extra;

  std::string canonical() const;  // deterministic dump used for the manifest hash
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

RunConfig load_config(const std::string& path);
RunConfig parse_config_json(const std::string& text);

}  // namespace floqsens::cli
