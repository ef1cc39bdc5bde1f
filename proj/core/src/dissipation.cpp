#include "ionfilter/dissipation.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

namespace ionfilter {
namespace {

Eigen::MatrixXd position_operator(FockSpace space) {
  const int n = space.levels();
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    x(k - 1, k) = std::sqrt(static_cast<double>(k));
    x(k, k - 1) = x(k - 1, k);
  }
  return x;
}

// Quadrature weights folded with the angular factor and the 1/2 prefactor.
std::vector<double> channel_weights(const QuadratureRule& rule, AngularKind kind) {
  std::vector<double> c(rule.nodes.size());
  for (std::size_t k = 0; k < c.size(); ++k)
    c[k] = 0.5 * rule.weights[k] * angular_distribution(kind, rule.nodes[k]);
  return c;
}

Matrix eigen_kernel(const Eigen::VectorXd& d, const EmissionSpec& spec, int order) {
  const QuadratureRule rule = gauss_legendre(order);
  const std::vector<double> c = channel_weights(rule, spec.angular);
  const Eigen::Index n = d.size();
  Matrix kernel = Matrix::Zero(n, n);
  for (std::size_t k = 0; k < c.size(); ++k) {
    const double beta = rule.nodes[k] * spec.eta_e;
    for (Eigen::Index b = 0; b < n; ++b)
      for (Eigen::Index a = 0; a < n; ++a)
        kernel(a, b) += c[k] * std::polar(1.0, beta * (d(a) - d(b)));
  }
  return kernel;
}

void require_square(const Matrix& m, Eigen::Index dim, const char* what) {
  if (m.rows() != dim || m.cols() != dim)
    throw InvalidArgument(std::string(what) + ": dimension mismatch (expected " +
                          std::to_string(dim) + ", got " + std::to_string(m.rows()) + "x" +
                          std::to_string(m.cols()) + ")");
}

}  // namespace

void EmissionSpec::validate() const {
  if (!(gamma >= 0.0) || !std::isfinite(gamma))
    throw InvalidArgument("EmissionSpec: gamma must be finite and >= 0");
  if (!(eta_e >= 0.0) || !std::isfinite(eta_e))
    throw InvalidArgument("EmissionSpec: eta_e must be finite and >= 0");
  if (quadrature_order < 2) throw InvalidArgument("EmissionSpec: quadrature order must be >= 2");
}

double angular_distribution(AngularKind kind, double s) {
  if (!(s >= -1.0 && s <= 1.0))
    throw InvalidArgument("angular_distribution: s must lie in [-1, 1]");
  switch (kind) {
    case AngularKind::Dipole:
      return 0.75 * (1.0 + s * s);
    case AngularKind::Isotropic:
      return 1.0;
  }
  return 1.0;
}

Matrix recoil_operator(double beta, FockSpace space) {
  if (!std::isfinite(beta)) throw InvalidArgument("recoil_operator: beta must be finite");
  const Matrix generator = Complex(0.0, beta) * position_operator(space).cast<Complex>();
  return generator.exp();
}

Matrix recoil_average_at_order(const Matrix& rho, const EmissionSpec& spec, FockSpace space,
                               int order) {
  spec.validate();
  const int n = space.levels();
  const bool vibronic = rho.rows() == 2 * n;
  require_square(rho, vibronic ? 2 * n : n, "recoil_average");
  if (spec.eta_e == 0.0) return rho;

  const QuadratureRule rule = gauss_legendre(order);
  const std::vector<double> c = channel_weights(rule, spec.angular);
  Matrix out = Matrix::Zero(rho.rows(), rho.cols());
  for (std::size_t k = 0; k < c.size(); ++k) {
    const Matrix u = recoil_operator(rule.nodes[k] * spec.eta_e, space);
    if (vibronic) {
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          out.block(a * n, b * n, n, n) += c[k] * (u * rho.block(a * n, b * n, n, n) * u.adjoint());
    } else {
      out += c[k] * (u * rho * u.adjoint());
    }
  }
  return out;
}

Matrix recoil_average(const Matrix& rho, const EmissionSpec& spec, FockSpace space) {
  const Matrix coarse = recoil_average_at_order(rho, spec, space, spec.quadrature_order);
  const Matrix fine = recoil_average_at_order(rho, spec, space, 2 * spec.quadrature_order);
  const double change = (coarse - fine).cwiseAbs().maxCoeff();
  if (change > 1e-8) {
    throw NumericalError("recoil_average: quadrature not converged (order " +
                         std::to_string(spec.quadrature_order) + " vs " +
                         std::to_string(2 * spec.quadrature_order) + " differ by " +
                         std::to_string(change) + "); use a larger quadrature order");
  }
  return coarse;
}

RecoilChannel::RecoilChannel(const EmissionSpec& spec, FockSpace space) {
  spec.validate();
  identity_ = spec.eta_e == 0.0;
  if (identity_) return;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(position_operator(space));
  basis_ = solver.eigenvectors();
  const Eigen::VectorXd& d = solver.eigenvalues();
  const Matrix kernel = eigen_kernel(d, spec, spec.quadrature_order);
  kernel_re_ = kernel.real();
  kernel_im_ = kernel.imag();
  kernel_defect_ =
      (kernel - eigen_kernel(d, spec, 2 * spec.quadrature_order)).cwiseAbs().maxCoeff();
}

Matrix RecoilChannel::apply(const Matrix& rho_vib) const {
  if (identity_) return rho_vib;
  // Real arithmetic throughout: V is real, so the complex parts rotate apart.
  const Eigen::MatrixXd re = basis_.transpose() * rho_vib.real() * basis_;
  const Eigen::MatrixXd im = basis_.transpose() * rho_vib.imag() * basis_;
  const Eigen::MatrixXd out_re = kernel_re_.cwiseProduct(re) - kernel_im_.cwiseProduct(im);
  const Eigen::MatrixXd out_im = kernel_re_.cwiseProduct(im) + kernel_im_.cwiseProduct(re);
  Matrix out(rho_vib.rows(), rho_vib.cols());
  out.real() = basis_ * out_re * basis_.transpose();
  out.imag() = basis_ * out_im * basis_.transpose();
  return out;
}

MasterEquation::MasterEquation(const VibronicOperator& hamiltonian, const EmissionSpec& spec)
    : space_(hamiltonian.space()),
      spec_(spec),
      hamiltonian_(hamiltonian.matrix().sparseView()),
      channel_(spec, hamiltonian.space()) {
  hamiltonian_.makeCompressed();
}

void MasterEquation::add_dissipator(const Matrix& rho, Matrix& out) const {
  if (spec_.gamma == 0.0) return;
  const int n = space_.levels();
  const double g = spec_.gamma;
  out.topLeftCorner(n, n) += g * channel_.apply(rho.bottomRightCorner(n, n));
  out.topRightCorner(n, n) -= 0.5 * g * rho.topRightCorner(n, n);
  out.bottomLeftCorner(n, n) -= 0.5 * g * rho.bottomLeftCorner(n, n);
  out.bottomRightCorner(n, n) -= g * rho.bottomRightCorner(n, n);
}

Matrix MasterEquation::rhs(const Matrix& rho) const {
  require_square(rho, space_.vibronic_dim(), "master_rhs");
  const Matrix h_rho = hamiltonian_ * rho;
  const Matrix rho_h = (hamiltonian_.adjoint() * rho.adjoint()).adjoint();
  Matrix out = Complex(0.0, -1.0) * (h_rho - rho_h);
  add_dissipator(rho, out);
  return out;
}

void MasterEquation::rhs_hermitian(const Matrix& rho, Matrix& out) const {
  const Matrix h_rho = hamiltonian_ * rho;
  out = Complex(0.0, -1.0) * (h_rho - h_rho.adjoint());
  add_dissipator(rho, out);
}

Matrix master_rhs(const Matrix& rho, const VibronicOperator& hamiltonian,
                  const EmissionSpec& spec, FockSpace space) {
  if (!(hamiltonian.space() == space))
    throw InvalidArgument("master_rhs: Hamiltonian built for a different Fock space");
  return MasterEquation(hamiltonian, spec).rhs(rho);
}

Matrix build_liouvillian(const VibronicOperator& hamiltonian, const EmissionSpec& spec,
                         FockSpace space, int max_dim) {
  spec.validate();
  const int dim = space.vibronic_dim();
  if (dim > max_dim) {
    throw InvalidArgument("build_liouvillian: vibronic dimension " + std::to_string(dim) +
                          " exceeds the cap of " + std::to_string(max_dim) +
                          "; use time evolution for larger truncations");
  }
  if (!(hamiltonian.space() == space))
    throw InvalidArgument("build_liouvillian: Hamiltonian built for a different Fock space");

  const Matrix id = Matrix::Identity(dim, dim);
  const Matrix& h = hamiltonian.matrix();
  Matrix liouvillian = Complex(0.0, -1.0) * (Eigen::kroneckerProduct(id, h).eval() -
                                             Eigen::kroneckerProduct(h.transpose(), id).eval());
  if (spec.gamma == 0.0) return liouvillian;

  const Matrix excited = tensor_vibronic(flip(Level::Excited, Level::Excited), identity(space)).matrix();
  liouvillian -= 0.5 * spec.gamma *
                 (Eigen::kroneckerProduct(id, excited).eval() +
                  Eigen::kroneckerProduct(excited.transpose(), id).eval());

  const Matrix2 lower = flip(Level::Ground, Level::Excited);
  const Matrix2 raise = flip(Level::Excited, Level::Ground);
  const int order = spec.quadrature_order;
  const QuadratureRule rule = gauss_legendre(order);
  const std::vector<double> c = channel_weights(rule, spec.angular);
  for (std::size_t k = 0; k < c.size(); ++k) {
    const Matrix u = spec.eta_e == 0.0 ? identity(space)
                                       : recoil_operator(rule.nodes[k] * spec.eta_e, space);
    const Matrix left = tensor_vibronic(lower, u).matrix();             // A_12 U
    const Matrix right = tensor_vibronic(raise, u.adjoint()).matrix();  // U^dagger A_21
    liouvillian += (spec.gamma * c[k]) * Eigen::kroneckerProduct(right.transpose(), left).eval();
  }
  return liouvillian;
}

}  // namespace ionfilter
