#pragma once

#include "floqsens/channels.hpp"
#include "floqsens/fock.hpp"
#include "floqsens/metrology.hpp"
#include "floqsens/runconfig.hpp"

namespace floqsens::cli {

// Exit codes: 0 success, 2 config error, 3 numerical breach (truncation or
// band-tracking failure).
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitBreach = 3;

struct RunOutcome {
  int exit_code = kExitOk;
  std::vector<std::string> artifacts;
  std::string message;
};

RunOutcome run_experiment(const RunConfig& config);

// Helpers shared with the test suites.
floquet::TwoToneModel build_model(const RunConfig& c);
lattice::FieldDistribution build_field(const RunConfig& c, const ops::PhaseGrid& grid);
// Ancilla from the drive-1 functional power operator; models with flat bands
// (zero functional power) fall back to the uniform computational superposition.
Vec build_ancilla(const floquet::FloquetSpectrum& s, const lattice::FieldDistribution& f,
                  const std::vector<double>& betas, bool* zero_power = nullptr);

std::string version_string();

}  // namespace floqsens::cli
