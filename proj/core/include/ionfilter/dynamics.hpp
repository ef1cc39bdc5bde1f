#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ionfilter/dissipation.hpp"
#include "ionfilter/fock.hpp"

namespace ionfilter {

struct EvolutionConfig {
  double t_final = 100.0;  ///< in units of 1/Gamma
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  double max_step = 10.0;
  double initial_step = 1e-2;
  double sample_stride = 1.0;  ///< time between recorded snapshots

  /// Stop once ||rhs||_F and the fluorescence rate stay below the thresholds
  /// for steady_samples consecutive samples.
  bool stop_at_steady = true;
  double steady_rhs_tol = 1e-10;
  double steady_fluorescence_tol = 1e-8;  ///< relative to Gamma
  int steady_samples = 10;

  /// Keep every sampled density matrix; otherwise only the last one.
  bool keep_snapshots = true;

  void validate() const;
};

struct ObservableRecord {
  double time = 0.0;
  double excited_population = 0.0;
  double mean_number = 0.0;
  double purity = 0.0;
  double fluorescence = 0.0;
  std::optional<double> fidelity;
  RealVector fock_populations;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<DensityMatrix> snapshots;
  std::vector<ObservableRecord> observables;

  double max_trace_drift = 0.0;  ///< |tr rho - 1| before renormalization
  double max_correction = 0.0;   ///< largest Frobenius repair at a sample
  double min_eigenvalue = 0.0;   ///< most negative eigenvalue seen before repair
  long steps_accepted = 0;
  long steps_rejected = 0;
  long rhs_evaluations = 0;
  bool reached_steady = false;

  const DensityMatrix& final_state() const { return snapshots.back(); }
  const ObservableRecord& final_observables() const { return observables.back(); }
};

/// Adaptive Dormand-Prince 5(4) integration of the master equation. The
/// optional target is a pure state, either vibronic (2N) or motional (N,
/// embedded in the electronic ground state); when given, each record carries
/// the fidelity to it.
Trajectory evolve(const DensityMatrix& rho0, const MasterEquation& equation,
                  const EvolutionConfig& config, const std::optional<Vector>& target = {});

Trajectory evolve(const DensityMatrix& rho0, const VibronicOperator& hamiltonian,
                  const EmissionSpec& spec, const EvolutionConfig& config,
                  const std::optional<Vector>& target = {});

inline constexpr int kNullspaceMaxLevels = 16;

struct SteadyStateResult {
  /// Hermitian, unit-trace stationary matrices spanning the kernel (the
  /// single steady state when the kernel is one-dimensional).
  std::vector<Matrix> states;
  /// Dimension of the joint support of the stationary states (the dark
  /// subspace). 1 for a unique pure steady state.
  int kernel_dimension = 0;
  /// Number of singular values of L below the threshold.
  int liouvillian_nullity = 0;
  /// True when L vanishes identically and every matrix is stationary.
  bool degenerate = false;
  double threshold = 0.0;
  double largest_null_singular_value = 0.0;
  double smallest_regular_singular_value = 0.0;
};

/// Kernel of a Liouvillian from build_liouvillian(). Singular values below
/// rel_threshold * ||L||_2 count as zero. Throws NumericalError when nothing
/// falls below the threshold and InvalidArgument above kNullspaceMaxLevels.
SteadyStateResult steady_state_nullspace(const Matrix& liouvillian, FockSpace space,
                                         double rel_threshold = 1e-10);

double fluorescence_rate(const Matrix& rho, double gamma, FockSpace space);

/// Uhlmann fidelity (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.
double fidelity(const Matrix& rho, const Matrix& sigma);
/// <psi|rho|psi> for a normalized psi of matching dimension.
double fidelity(const Matrix& rho, const Vector& psi);
double purity(const Matrix& rho);

}  // namespace ionfilter
