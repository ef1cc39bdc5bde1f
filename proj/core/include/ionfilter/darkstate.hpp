#pragma once

#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "ionfilter/dissipation.hpp"
#include "ionfilter/dynamics.hpp"
#include "ionfilter/fock.hpp"
#include "ionfilter/hamiltonian.hpp"

namespace ionfilter {

/// Tail weight (population of the top two retained levels) below which a
/// truncation-limited dark state counts as converged.
inline constexpr double kTailTolerance = 1e-10;

struct DarkStateResult {
  Vector coefficients;  ///< normalized, exactly zero outside the support
  int support_min = 0;
  int support_max = 0;
  /// The support runs into the truncation; support_max is then N-1.
  bool truncation_limited = false;
  /// Sum of |C_n|^2 with the first coefficient of the support set to 1.
  double normalization = 1.0;
  bool converged = true;
  double tail_weight = 0.0;
  std::vector<std::string> warnings;
};

/// Analytic dark state for adjacent sidebands (j = m + 1), built from the
/// two-term recurrence of K. For m >= 1 the levels |0>..|m-1> are trivially
/// dark as well; the result is the chain starting at |m>.
DarkStateResult dark_coefficients_adjacent(const DriveConfig& config, FockSpace space);

struct DarkSpaceBasis {
  std::vector<Vector> basis;  ///< orthonormal, each supported on one residue class
  std::vector<int> residue;   ///< n mod (j - m) of each basis vector
  int dimension = 0;
  double threshold = 0.0;     ///< absolute singular-value cutoff
  double kernel_norm = 0.0;   ///< ||K||_2
  /// Smallest singular value counted as nonzero, per residue class.
  std::vector<double> smallest_regular;
};

/// Numerical kernel of K: singular values below rel_threshold * ||K||_2.
/// Throws NumericalError when nothing falls below the cutoff.
DarkSpaceBasis dark_space_basis(const DriveConfig& config, FockSpace space,
                                double rel_threshold = 1e-10);

struct LowPass {
  int q = 1;
};
struct HighPass {
  int p = 1;
};
struct BandPass {
  int p = 1;
  int q = 2;
};
struct NumberState {
  int q = 2;
};
struct Qubit {
  double ratio = 1.0;  ///< |C1/C0|
  int sign = -1;       ///< sign of C1/C0
};
using FilterSpec = std::variant<LowPass, HighPass, BandPass, NumberState, Qubit>;

/// Throws InvalidArgument when the filter description itself is malformed. NumberState(0)
/// and NumberState(1) pass here; design_filter decides what to do with them.
void validate(const FilterSpec& spec);
std::string describe(const FilterSpec& spec);

/// Fock levels [lo, hi] the designed state should occupy; hi is clipped to
/// levels - 1 for the open-ended high-pass zone.
std::pair<int, int> zone_bounds(const FilterSpec& spec, int levels);
double out_of_zone_population(const RealVector& populations, const FilterSpec& spec);

struct ZeroChoices {
  int m_root = 0;  ///< index into the ascending zeros of L_q
  int j_root = 0;  ///< index into the ascending zeros of L_p^{(1)}
};

struct DesignOptions {
  int levels = 30;
  double rabi_j = 0.2;
  double rabi_ratio = 1.0;  ///< Omega_m / Omega_j (ignored for qubits)
  /// Lamb-Dicke parameter of the drive the zone does not pin down.
  double free_eta = 0.5;
  ZeroChoices zeros;
};

struct Design {
  FilterSpec spec;
  DriveConfig config;
  DarkStateResult predicted;
};

/// Chooses Lamb-Dicke parameters (and for qubits the Rabi ratio) whose
/// Laguerre zeros cut the dark state to the requested zone. Throws
/// UndesignableError for NumberState(1).
Design design_filter(const FilterSpec& spec, const DesignOptions& options = {});

/// |C1/C0| of the dominant ground-state eigenvector of rho.
double measured_amplitude_ratio(const Matrix& rho, FockSpace space);

struct VerificationReport {
  double evolution_fidelity = 0.0;
  double final_fluorescence = 0.0;
  double out_of_zone = 0.0;
  double measured_ratio = 0.0;
  double final_time = 0.0;
  bool reached_steady = false;
  std::optional<double> nullspace_fidelity;
  std::optional<int> kernel_dimension;
  Trajectory trajectory;
};

/// Evolves a thermal ground-state ensemble under the designed drives and,
/// when N <= kNullspaceMaxLevels, also solves the Liouvillian kernel.
VerificationReport verify_design(const Design& design, const EmissionSpec& emission,
                                 const EvolutionConfig& evolution, double initial_nbar);

}  // namespace ionfilter
