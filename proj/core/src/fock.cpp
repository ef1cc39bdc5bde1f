#include "ionfilter/fock.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include <Eigen/Eigenvalues>

namespace ionfilter {

FockSpace::FockSpace(int levels) : levels_(levels) {
  if (levels < 2)
    throw InvalidArgument("FockSpace: truncation must keep at least 2 levels, got " +
                          std::to_string(levels));
}

Matrix2 flip(Level a, Level b) {
  Matrix2 m = Matrix2::Zero();
  m(static_cast<int>(a), static_cast<int>(b)) = 1.0;
  return m;
}

Matrix identity(FockSpace space) { return Matrix::Identity(space.levels(), space.levels()); }

Matrix annihilation(FockSpace space) {
  const int n = space.levels();
  Matrix a = Matrix::Zero(n, n);
  for (int k = 1; k < n; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
  return a;
}

Matrix creation(FockSpace space) { return annihilation(space).adjoint(); }

Matrix number_operator(FockSpace space) {
  return diag_of_number([](int n) { return static_cast<double>(n); }, space);
}

DensityCheck check_density(const Matrix& rho) {
  DensityCheck check;
  if (rho.rows() != rho.cols() || rho.rows() == 0) {
    check.hermiticity = std::numeric_limits<double>::infinity();
    return check;
  }
  check.hermiticity = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
  check.trace_error = std::abs(rho.trace() - Complex(1.0));
  const Matrix herm = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(herm, Eigen::EigenvaluesOnly);
  check.min_eigenvalue = solver.eigenvalues().minCoeff();
  return check;
}

DensityMatrix::DensityMatrix(Matrix rho) : rho_(std::move(rho)) {
  const DensityCheck c = check_density(rho_);
  if (!c.ok()) {
    throw InvalidArgument("DensityMatrix: invariant violated (hermiticity " +
                          std::to_string(c.hermiticity) + ", trace error " +
                          std::to_string(c.trace_error) + ", min eigenvalue " +
                          std::to_string(c.min_eigenvalue) + ")");
  }
}

DensityMatrix DensityMatrix::repaired(Matrix rho) {
  Matrix fixed = 0.5 * (rho + rho.adjoint());
  const Complex tr = fixed.trace();
  if (std::abs(tr) == 0.0) throw InvalidArgument("DensityMatrix: zero trace cannot be normalized");
  fixed /= tr.real();
  DensityMatrix out(fixed);
  out.correction_ = (out.rho_ - rho).norm();
  return out;
}

PureVibrationalState::PureVibrationalState(Vector coefficients) : c_(std::move(coefficients)) {
  if (c_.size() < 2) throw InvalidArgument("PureVibrationalState: needs at least 2 levels");
  if (std::abs(c_.norm() - 1.0) > 1e-12)
    throw InvalidArgument("PureVibrationalState: state is not normalized");
}

DensityMatrix PureVibrationalState::projector() const {
  return DensityMatrix::repaired(c_ * c_.adjoint());
}

VibronicOperator::VibronicOperator(Matrix m, FockSpace space) : m_(std::move(m)), space_(space) {
  if (m_.rows() != space.vibronic_dim() || m_.cols() != space.vibronic_dim())
    throw InvalidArgument("VibronicOperator: dimension does not match the Fock space");
}

Matrix VibronicOperator::block(Level a, Level b) const {
  const int n = space_.levels();
  return m_.block(static_cast<int>(a) * n, static_cast<int>(b) * n, n, n);
}

VibronicOperator tensor_vibronic(const Matrix2& electronic, const Matrix& vibrational) {
  if (vibrational.rows() != vibrational.cols())
    throw InvalidArgument("tensor_vibronic: vibrational part must be square");
  const Eigen::Index n = vibrational.rows();
  Matrix out(2 * n, 2 * n);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) out.block(a * n, b * n, n, n) = electronic(a, b) * vibrational;
  return VibronicOperator(std::move(out), FockSpace(static_cast<int>(n)));
}

PureVibrationalState number_state(int q, FockSpace space) {
  if (q < 0 || q >= space.levels())
    throw InvalidArgument("number_state: level " + std::to_string(q) +
                          " outside truncation of " + std::to_string(space.levels()));
  Vector v = Vector::Zero(space.levels());
  v(q) = 1.0;
  return PureVibrationalState(std::move(v));
}

PureVibrationalState coherent_state(Complex alpha, FockSpace space) {
  const int n = space.levels();
  Vector v(n);
  Complex term = std::exp(-0.5 * std::norm(alpha));
  for (int k = 0; k < n; ++k) {
    v(k) = term;
    term *= alpha / std::sqrt(static_cast<double>(k + 1));
  }
  const double kept = v.squaredNorm();
  if (1.0 - kept > 1e-8)
    throw InvalidArgument("coherent_state: truncation drops " + std::to_string(1.0 - kept) +
                          " of the weight; increase the number of levels");
  v /= std::sqrt(kept);
  return PureVibrationalState(std::move(v));
}

DensityMatrix thermal_state(double nbar, FockSpace space) {
  if (!(nbar >= 0.0) || !std::isfinite(nbar))
    throw InvalidArgument("thermal_state: mean occupation must be finite and non-negative");
  const int n = space.levels();
  const double r = nbar / (1.0 + nbar);
  const double tail = std::pow(r, n);
  if (tail > 1e-8) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "thermal_state: tail weight %.3g beyond %d levels exceeds 1e-8; increase the number of levels",
                  tail, n);
    throw InvalidArgument(buf);
  }
  RealVector p(n);
  double w = 1.0;
  for (int k = 0; k < n; ++k) {
    p(k) = w;
    w *= r;
  }
  p /= p.sum();
  return DensityMatrix(Matrix(p.cast<Complex>().asDiagonal()));
}

Matrix embed(const Matrix& rho_vib, Level level) {
  const Eigen::Index n = rho_vib.rows();
  Matrix out = Matrix::Zero(2 * n, 2 * n);
  const Eigen::Index off = static_cast<int>(level) * n;
  out.block(off, off, n, n) = rho_vib;
  return out;
}

Vector embed(const Vector& psi, Level level) {
  const Eigen::Index n = psi.size();
  Vector out = Vector::Zero(2 * n);
  out.segment(static_cast<int>(level) * n, n) = psi;
  return out;
}

Matrix reduced_vibrational(const Matrix& rho, FockSpace space) {
  const int n = space.levels();
  if (rho.rows() == n) return rho;
  if (rho.rows() != 2 * n)
    throw InvalidArgument("reduced_vibrational: dimension does not match the Fock space");
  return rho.topLeftCorner(n, n) + rho.bottomRightCorner(n, n);
}

RealVector fock_populations(const Matrix& rho, FockSpace space) {
  return reduced_vibrational(rho, space).diagonal().real();
}

double mean_number(const Matrix& rho, FockSpace space) {
  const RealVector p = fock_populations(rho, space);
  double s = 0.0;
  for (Eigen::Index k = 0; k < p.size(); ++k) s += static_cast<double>(k) * p(k);
  return s;
}

double excited_population(const Matrix& rho, FockSpace space) {
  const int n = space.levels();
  if (rho.rows() != 2 * n)
    throw InvalidArgument("excited_population: expects a vibronic density matrix");
  return rho.bottomRightCorner(n, n).trace().real();
}

double top_population(const Matrix& rho, FockSpace space) {
  const RealVector p = fock_populations(rho, space);
  const Eigen::Index n = p.size();
  return p(n - 1) + p(n - 2);
}

}  // namespace ionfilter
