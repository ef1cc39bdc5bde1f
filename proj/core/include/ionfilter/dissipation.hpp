#pragma once

#include <Eigen/Sparse>

#include "ionfilter/fock.hpp"
#include "ionfilter/quadrature.hpp"

namespace ionfilter {

enum class AngularKind { Dipole, Isotropic };

/// Spontaneous emission parameters. eta_e is independent of the drive
/// Lamb-Dicke parameters; callers typically set it to the m-drive's value.
struct EmissionSpec {
  double gamma = 1.0;
  double eta_e = 0.0;
  AngularKind angular = AngularKind::Dipole;
  int quadrature_order = 16;

  void validate() const;
};

/// Angular weight W(s), normalized so that (1/2) int_{-1}^{1} W(s) ds = 1.
/// Dipole: (3/4)(1 + s^2). Isotropic: 1.
double angular_distribution(AngularKind kind, double s);

/// exp(i beta (a + a^dagger)) on the truncated space, by Pade scaling and
/// squaring.
Matrix recoil_operator(double beta, FockSpace space);

/// Quadrature of (1/2) int ds W(s) U(s eta_e) rho U(s eta_e)^dagger at a fixed
/// order, with U from recoil_operator(). rho may be N x N or 2N x 2N; in the
/// latter case U acts as identity (x) U.
Matrix recoil_average_at_order(const Matrix& rho, const EmissionSpec& spec, FockSpace space,
                               int order);

/// Checked recoil average: compares against twice the quadrature order and
/// throws NumericalError when the two differ by more than 1e-8.
Matrix recoil_average(const Matrix& rho, const EmissionSpec& spec, FockSpace space);

/// Recoil average precomputed in the eigenbasis of x = a + a^dagger:
/// U(beta) = V exp(i beta D) V^T, so the whole angular integral collapses into
/// an elementwise kernel M_ab = (1/2) sum_k w_k W(s_k) exp(i s_k eta_e (d_a - d_b)).
/// Mathematically identical to recoil_average_at_order() at the same order.
class RecoilChannel {
 public:
  RecoilChannel(const EmissionSpec& spec, FockSpace space);

  /// Motional block only (N x N).
  Matrix apply(const Matrix& rho_vib) const;
  /// max |M(order) - M(2 order)| over kernel entries.
  double kernel_defect() const noexcept { return kernel_defect_; }

 private:
  Eigen::MatrixXd basis_;      // V
  Eigen::MatrixXd kernel_re_;  // M, split into real and imaginary parts
  Eigen::MatrixXd kernel_im_;
  double kernel_defect_ = 0.0;
  bool identity_ = false;
};

/// Right-hand side of the master equation
///   d rho/dt = -i[H, rho] + (Gamma/2)(2 A_12 rho~ A_21 - A_22 rho - rho A_22).
/// Holds the precomputed recoil channel, so repeated calls are cheap.
class MasterEquation {
 public:
  MasterEquation(const VibronicOperator& hamiltonian, const EmissionSpec& spec);

  Matrix rhs(const Matrix& rho) const;
  /// Same as rhs() for Hermitian rho, using rho H = (H rho)^dagger.
  void rhs_hermitian(const Matrix& rho, Matrix& out) const;

  FockSpace space() const noexcept { return space_; }
  const EmissionSpec& emission() const noexcept { return spec_; }
  const RecoilChannel& channel() const noexcept { return channel_; }

 private:
  void add_dissipator(const Matrix& rho, Matrix& out) const;

  FockSpace space_;
  EmissionSpec spec_;
  Eigen::SparseMatrix<Complex> hamiltonian_;
  RecoilChannel channel_;
};

/// One-shot master_rhs; builds a MasterEquation internally.
Matrix master_rhs(const Matrix& rho, const VibronicOperator& hamiltonian,
                  const EmissionSpec& spec, FockSpace space);

/// Dense Liouvillian acting on column-major vec(rho), assembled from
/// Kronecker products with recoil_operator() at each quadrature node.
/// Throws InvalidArgument when 2N exceeds max_dim.
Matrix build_liouvillian(const VibronicOperator& hamiltonian, const EmissionSpec& spec,
                         FockSpace space, int max_dim = 40);

}  // namespace ionfilter
