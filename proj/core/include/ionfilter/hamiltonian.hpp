#pragma once

#include "ionfilter/fock.hpp"

namespace ionfilter {

/// One laser tuned to a lower motional sideband.
struct LaserDrive {
  int sideband_order = 0;
  Complex rabi = 0.0;       ///< in units of the reference rate (Gamma = 1)
  double lamb_dicke = 0.1;

  void validate() const;
};

/// Two-color drive on sidebands j > m; the spacing of the dark-state chain is
/// j - m.
struct DriveConfig {
  LaserDrive drive_j;
  LaserDrive drive_m;

  int j() const noexcept { return drive_j.sideband_order; }
  int m() const noexcept { return drive_m.sideband_order; }
  int spacing() const noexcept { return j() - m(); }

  void validate() const;
};

/// Diagonal entries of exp(-eta^2/2) n!/(n+s)! L_n^{(s)}(eta^2), n = 0..N-1.
RealVector coupling_values(int sideband_order, double lamb_dicke, FockSpace space);
Matrix coupling_function(int sideband_order, double lamb_dicke, FockSpace space);

/// K = Omega_j f_j(n) a^j + Omega_m f_m(n) a^m. Its kernel is the dark space.
Matrix vibrational_kernel_operator(const DriveConfig& config, FockSpace space);

/// H_I = A_21 (x) K + A_12 (x) K^dagger (hbar = 1).
VibronicOperator build_interaction_hamiltonian(const DriveConfig& config, FockSpace space);

}  // namespace ionfilter
