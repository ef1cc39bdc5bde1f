#include "ionfilter/hamiltonian.hpp"

#include <cmath>
#include <string>

#include "ionfilter/laguerre.hpp"

namespace ionfilter {
namespace {

void require_truncation(const DriveConfig& config, FockSpace space) {
  if (space.levels() <= config.j())
    throw InvalidArgument("truncation below sideband order: " + std::to_string(space.levels()) +
                          " levels cannot carry a sideband of order " + std::to_string(config.j()));
}

// a^s as a dense matrix: <n|a^s|n+s> = sqrt((n+1)...(n+s)).
Matrix lowering_power(int s, FockSpace space) {
  const int n_levels = space.levels();
  Matrix out = Matrix::Zero(n_levels, n_levels);
  for (int n = 0; n + s < n_levels; ++n) {
    double amp = 1.0;
    for (int k = n + 1; k <= n + s; ++k) amp *= std::sqrt(static_cast<double>(k));
    out(n, n + s) = amp;
  }
  return out;
}

}  // namespace

void LaserDrive::validate() const {
  if (sideband_order < 0) throw InvalidArgument("LaserDrive: sideband order must be >= 0");
  if (!(lamb_dicke > 0.0) || !std::isfinite(lamb_dicke))
    throw InvalidArgument("LaserDrive: Lamb-Dicke parameter must be positive");
  if (!std::isfinite(rabi.real()) || !std::isfinite(rabi.imag()))
    throw InvalidArgument("LaserDrive: Rabi frequency must be finite");
}

void DriveConfig::validate() const {
  drive_j.validate();
  drive_m.validate();
  if (j() <= m())
    throw InvalidArgument("DriveConfig: sideband order j must exceed m (got j=" +
                          std::to_string(j()) + ", m=" + std::to_string(m()) + ")");
}

RealVector coupling_values(int s, double eta, FockSpace space) {
  if (s < 0) throw InvalidArgument("coupling_values: sideband order must be >= 0");
  if (!(eta > 0.0)) throw InvalidArgument("coupling_values: Lamb-Dicke parameter must be positive");
  const double x = eta * eta;
  const double prefactor = std::exp(-0.5 * x);
  RealVector f(space.levels());
  for (int n = 0; n < space.levels(); ++n) {
    double ratio = 1.0;
    for (int k = n + 1; k <= n + s; ++k) ratio /= static_cast<double>(k);
    f(n) = prefactor * ratio * laguerre::eval(n, s, x);
  }
  return f;
}

Matrix coupling_function(int s, double eta, FockSpace space) {
  const RealVector f = coupling_values(s, eta, space);
  return diag_of_number([&f](int n) { return f(n); }, space);
}

Matrix vibrational_kernel_operator(const DriveConfig& config, FockSpace space) {
  config.validate();
  require_truncation(config, space);
  const auto& dj = config.drive_j;
  const auto& dm = config.drive_m;
  const RealVector fj = coupling_values(dj.sideband_order, dj.lamb_dicke, space);
  const RealVector fm = coupling_values(dm.sideband_order, dm.lamb_dicke, space);
  Matrix k = dj.rabi * (fj.cast<Complex>().asDiagonal() * lowering_power(dj.sideband_order, space));
  k += dm.rabi * (fm.cast<Complex>().asDiagonal() * lowering_power(dm.sideband_order, space));
  return k;
}

VibronicOperator build_interaction_hamiltonian(const DriveConfig& config, FockSpace space) {
  const Matrix k = vibrational_kernel_operator(config, space);
  const int n = space.levels();
  Matrix h = Matrix::Zero(2 * n, 2 * n);
  h.block(n, 0, n, n) = k;            // A_21 (x) K
  h.block(0, n, n, n) = k.adjoint();  // A_12 (x) K^dagger
  return VibronicOperator(std::move(h), space);
}

}  // namespace ionfilter
