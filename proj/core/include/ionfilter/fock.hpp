#pragma once

#include <cmath>
#include <complex>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "ionfilter/error.hpp"

namespace ionfilter {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Matrix2 = Eigen::Matrix2cd;

/// Truncated motional Hilbert space spanned by |0>, ..., |levels-1>.
class FockSpace {
 public:
  explicit FockSpace(int levels);

  int levels() const noexcept { return levels_; }
  /// Dimension of the two-level (x) Fock product space.
  int vibronic_dim() const noexcept { return 2 * levels_; }

  friend bool operator==(const FockSpace&, const FockSpace&) = default;

 private:
  int levels_;
};

/// Electronic levels. Ground |1> occupies the first Fock block, excited |2>
/// the second; Fock index runs fastest.
enum class Level { Ground = 0, Excited = 1 };

/// Flip operator A_ab = |a><b| on the two-level system.
Matrix2 flip(Level a, Level b);

Matrix identity(FockSpace space);
Matrix annihilation(FockSpace space);
Matrix creation(FockSpace space);
Matrix number_operator(FockSpace space);

/// diag(f(0), ..., f(N-1)). Throws InvalidArgument naming the first level
/// where f is not finite.
template <class F>
Matrix diag_of_number(F&& f, FockSpace space) {
  const int n_levels = space.levels();
  Vector d(n_levels);
  for (int n = 0; n < n_levels; ++n) {
    const Complex v = Complex(f(n));
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw InvalidArgument("diag_of_number: function is not finite at level " +
                            std::to_string(n));
    d(n) = v;
  }
  return d.asDiagonal();
}

struct DensityCheck {
  double hermiticity = 0.0;     ///< max |rho - rho^dagger|
  double trace_error = 0.0;     ///< |tr rho - 1|
  double min_eigenvalue = 0.0;

  bool ok() const {
    return hermiticity <= 1e-12 && trace_error <= 1e-12 && min_eigenvalue > -1e-10;
  }
};

DensityCheck check_density(const Matrix& rho);

/// Hermitian, unit-trace, positive (to rounding) matrix. Either N x N
/// (motion only) or 2N x 2N (vibronic).
class DensityMatrix {
 public:
  /// Validates the invariants; throws InvalidArgument on violation.
  explicit DensityMatrix(Matrix rho);

  /// Hermitizes and renormalizes the trace before validating. The Frobenius
  /// size of the applied correction is available via correction().
  static DensityMatrix repaired(Matrix rho);

  const Matrix& matrix() const noexcept { return rho_; }
  Eigen::Index dim() const noexcept { return rho_.rows(); }
  double correction() const noexcept { return correction_; }

 private:
  DensityMatrix() = default;
  Matrix rho_;
  double correction_ = 0.0;
};

/// Normalized motional state vector.
class PureVibrationalState {
 public:
  explicit PureVibrationalState(Vector coefficients);

  const Vector& coefficients() const noexcept { return c_; }
  int levels() const noexcept { return static_cast<int>(c_.size()); }
  DensityMatrix projector() const;

 private:
  Vector c_;
};

/// Operator on the 2N-dimensional vibronic space.
class VibronicOperator {
 public:
  VibronicOperator(Matrix m, FockSpace space);

  const Matrix& matrix() const noexcept { return m_; }
  FockSpace space() const noexcept { return space_; }
  /// Vibrational block <a| O |b>.
  Matrix block(Level a, Level b) const;

 private:
  Matrix m_;
  FockSpace space_;
};

VibronicOperator tensor_vibronic(const Matrix2& electronic, const Matrix& vibrational);

PureVibrationalState number_state(int q, FockSpace space);
/// Truncated coherent state; throws if more than 1e-8 of the weight lies
/// beyond the truncation.
PureVibrationalState coherent_state(Complex alpha, FockSpace space);
/// Thermal motional state with mean occupation nbar, renormalized on the
/// truncated space. Throws if the geometric tail beyond N-1 exceeds 1e-8.
DensityMatrix thermal_state(double nbar, FockSpace space);

/// |level><level| (x) rho_vib.
Matrix embed(const Matrix& rho_vib, Level level = Level::Ground);
/// |level> (x) psi.
Vector embed(const Vector& psi, Level level = Level::Ground);

/// Partial trace over the electronic factor.
Matrix reduced_vibrational(const Matrix& rho_vibronic, FockSpace space);
/// Diagonal of the reduced motional state.
RealVector fock_populations(const Matrix& rho, FockSpace space);
double mean_number(const Matrix& rho, FockSpace space);
double excited_population(const Matrix& rho, FockSpace space);

/// Motional population in the top two Fock levels.
double top_population(const Matrix& rho, FockSpace space);
inline constexpr double kTruncationLeak = 1e-8;
inline bool truncation_leak(const Matrix& rho, FockSpace space) {
  return top_population(rho, space) > kTruncationLeak;
}

}  // namespace ionfilter
