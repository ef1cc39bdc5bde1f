#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "ionfilter/darkstate.hpp"
#include "ionfilter/dissipation.hpp"
#include "ionfilter/dynamics.hpp"
#include "ionfilter/hamiltonian.hpp"

namespace ionfilter {

struct InitialStateSpec {
  enum class Kind { Thermal, Number, Coherent };
  Kind kind = Kind::Thermal;
  double nbar = 0.5;
  int q = 0;
  Complex alpha = 0.0;
  Level level = Level::Ground;
};

/// Builds the vibronic initial density matrix.
DensityMatrix make_initial_state(const InitialStateSpec& spec, FockSpace space);

enum class TargetKind { None, Dark };

/// One simulation run. See docs/config.md for the JSON layout.
struct RunConfig {
  int levels = 30;
  DriveConfig drives;
  EmissionSpec emission;
  InitialStateSpec initial;
  EvolutionConfig evolution;
  TargetKind target = TargetKind::Dark;
  std::string output_dir;  ///< empty: use the environment or the working directory
  std::string output_prefix = "run";
  std::uint64_t seed = 0;

  FockSpace space() const { return FockSpace(levels); }
  void validate() const;
};

RunConfig default_run_config();

/// Parses a JSON config on top of the defaults. Unknown keys, wrong types and
/// invariant violations throw ConfigError.
RunConfig parse_run_config(const std::string& json_text);
RunConfig parse_run_config(const std::string& json_text, const RunConfig& base);
std::string to_json(const RunConfig& config);

/// {n, re, im, support, truncation_limited, normalization, converged,
/// tail_weight, warnings}; doubles are written in shortest round-trip form.
std::string dark_state_json(const DarkStateResult& state);
DarkStateResult parse_dark_state_json(const std::string& json_text);

/// {levels, dim, time, re, im} with row-major nested arrays.
std::string density_json(const Matrix& rho, FockSpace space, double time);
Matrix parse_density_json(const std::string& json_text);

/// Header: time,excited_population,mean_number,purity,fluorescence,fidelity,
/// p_0..p_{N-1}. 12 significant digits; fidelity is blank without a target.
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory, FockSpace space);

std::string format_csv_number(double value);

}  // namespace ionfilter
