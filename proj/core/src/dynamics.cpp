#include "ionfilter/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace ionfilter {
namespace {

// Dormand-Prince 5(4) tableau.
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                 b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

struct Repair {
  Matrix rho;
  double trace_drift = 0.0;
  double correction = 0.0;
  double min_eigenvalue = 0.0;
};

// Hermitize and renormalize the trace; that correction is what gets logged.
// Negative eigenvalues above the abort threshold are then clipped so every
// snapshot is a valid density matrix.
Repair repair_state(const Matrix& rho) {
  Repair r;
  r.trace_drift = std::abs(rho.trace() - Complex(1.0));
  Matrix herm = 0.5 * (rho + rho.adjoint());
  herm /= herm.trace().real();
  r.correction = (herm - rho).norm();
  Eigen::SelfAdjointEigenSolver<Matrix> solver(herm);
  Eigen::VectorXd ev = solver.eigenvalues();
  r.min_eigenvalue = ev.minCoeff();
  if (r.min_eigenvalue < 0.0) {
    ev = ev.cwiseMax(0.0);
    herm = solver.eigenvectors() * ev.cast<Complex>().asDiagonal() * solver.eigenvectors().adjoint();
    herm = 0.5 * (herm + herm.adjoint());
    herm /= herm.trace().real();
  }
  r.rho = std::move(herm);
  return r;
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

double error_norm(const Matrix& err, const Matrix& y0, const Matrix& y1, double atol, double rtol) {
  double sum = 0.0;
  const Eigen::Index n = err.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double sc = atol + rtol * std::max(std::abs(y0(i)), std::abs(y1(i)));
    const double q = std::abs(err(i)) / sc;
    sum += q * q;
  }
  return std::sqrt(sum / static_cast<double>(n));
}

Vector normalized_target(const Vector& target, FockSpace space) {
  Vector t;
  if (target.size() == space.levels()) {
    t = embed(target, Level::Ground);
  } else if (target.size() == space.vibronic_dim()) {
    t = target;
  } else {
    throw InvalidArgument("evolve: target dimension matches neither the motional nor the vibronic space");
  }
  const double norm = t.norm();
  if (norm == 0.0) throw InvalidArgument("evolve: target state is zero");
  return t / norm;
}

}  // namespace

void EvolutionConfig::validate() const {
  if (!(t_final > 0.0)) throw InvalidArgument("EvolutionConfig: t_final must be positive");
  if (!(rel_tol > 0.0 && rel_tol <= 1e-3))
    throw InvalidArgument("EvolutionConfig: rel_tol must lie in (0, 1e-3]");
  if (!(abs_tol > 0.0)) throw InvalidArgument("EvolutionConfig: abs_tol must be positive");
  if (!(max_step > 0.0)) throw InvalidArgument("EvolutionConfig: max_step must be positive");
  if (!(initial_step > 0.0)) throw InvalidArgument("EvolutionConfig: initial_step must be positive");
  if (!(sample_stride > 0.0)) throw InvalidArgument("EvolutionConfig: sample_stride must be positive");
  if (steady_samples < 1) throw InvalidArgument("EvolutionConfig: steady_samples must be >= 1");
}

Trajectory evolve(const DensityMatrix& rho0, const MasterEquation& equation,
                  const EvolutionConfig& config, const std::optional<Vector>& target) {
  config.validate();
  const FockSpace space = equation.space();
  const double gamma = equation.emission().gamma;
  if (rho0.dim() != space.vibronic_dim())
    throw InvalidArgument("evolve: initial state must be a vibronic density matrix");
  const std::optional<Vector> psi =
      target ? std::optional<Vector>(normalized_target(*target, space)) : std::nullopt;

  Trajectory traj;
  int quiet_samples = 0;

  auto record = [&](double t, const Matrix& rho, const Matrix& derivative) {
    ObservableRecord obs;
    obs.time = t;
    obs.excited_population = excited_population(rho, space);
    obs.mean_number = mean_number(rho, space);
    obs.purity = purity(rho);
    obs.fluorescence = gamma * obs.excited_population;
    obs.fock_populations = fock_populations(rho, space);
    if (psi) obs.fidelity = fidelity(rho, *psi);
    traj.times.push_back(t);
    traj.observables.push_back(std::move(obs));
    if (!config.keep_snapshots && !traj.snapshots.empty()) traj.snapshots.pop_back();
    traj.snapshots.push_back(DensityMatrix::repaired(rho));

    const bool quiet = derivative.norm() < config.steady_rhs_tol &&
                       traj.observables.back().fluorescence <=
                           config.steady_fluorescence_tol * std::max(gamma, 1e-300);
    quiet_samples = quiet ? quiet_samples + 1 : 0;
    return config.stop_at_steady && quiet_samples >= config.steady_samples;
  };

  Matrix y = rho0.matrix();
  Matrix k1, k2, k3, k4, k5, k6, k7;
  equation.rhs_hermitian(y, k1);
  ++traj.rhs_evaluations;
  if (record(0.0, y, k1)) {
    traj.reached_steady = true;
    return traj;
  }

  double t = 0.0;
  double h = std::min({config.initial_step, config.max_step, config.sample_stride});
  double err_prev = 1e-4;
  long sample_index = 1;
  Matrix y_stage, y_new, err;

  while (t < config.t_final) {
    const double t_sample = std::min(config.t_final, sample_index * config.sample_stride);
    const double h_try = std::min(h, t_sample - t);
    if (h_try < 1e-12 * std::max(1.0, std::abs(t)))
      throw NumericalError("evolve: step size underflow at t = " + sci(t));

    y_stage = y + h_try * (a21 * k1);
    equation.rhs_hermitian(y_stage, k2);
    y_stage = y + h_try * (a31 * k1 + a32 * k2);
    equation.rhs_hermitian(y_stage, k3);
    y_stage = y + h_try * (a41 * k1 + a42 * k2 + a43 * k3);
    equation.rhs_hermitian(y_stage, k4);
    y_stage = y + h_try * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    equation.rhs_hermitian(y_stage, k5);
    y_stage = y + h_try * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    equation.rhs_hermitian(y_stage, k6);
    y_new = y + h_try * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    equation.rhs_hermitian(y_new, k7);
    traj.rhs_evaluations += 6;

    err = h_try * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const double en = error_norm(err, y, y_new, config.abs_tol, config.rel_tol);
    if (!std::isfinite(en)) throw NumericalError("evolve: non-finite state at t = " + sci(t));

    if (en <= 1.0) {
      ++traj.steps_accepted;
      t += h_try;
      y.swap(y_new);
      k1.swap(k7);
      // PI controller (beta = 0.04).
      double fac = std::pow(std::max(en, 1e-10), 0.17) / std::pow(err_prev, 0.04) / 0.9;
      fac = std::clamp(fac, 0.2, 10.0);
      err_prev = std::max(en, 1e-4);
      if (h_try == h) h = std::min(h / fac, config.max_step);

      if (t >= t_sample - 1e-12 * std::max(1.0, t_sample)) {
        t = t_sample;
        ++sample_index;
        const Repair fix = repair_state(y);
        traj.max_trace_drift = std::max(traj.max_trace_drift, fix.trace_drift);
        traj.min_eigenvalue = std::min(traj.min_eigenvalue, fix.min_eigenvalue);
        if (fix.min_eigenvalue < -1e-6) {
          throw NumericalError("evolve: positivity violated at t = " + sci(t) +
                               " (min eigenvalue " + sci(fix.min_eigenvalue) +
                               "); tighten the tolerances");
        }
        if (fix.correction > 1e-8) {
          throw NumericalError("evolve: state repair of " + sci(fix.correction) +
                               " at t = " + sci(t) + " exceeds 1e-8; tighten the tolerances");
        }
        traj.max_correction = std::max(traj.max_correction, fix.correction);
        y = fix.rho;
        equation.rhs_hermitian(y, k1);
        ++traj.rhs_evaluations;
        if (record(t, y, k1)) {
          traj.reached_steady = true;
          break;
        }
      }
    } else {
      ++traj.steps_rejected;
      const double fac = std::clamp(std::pow(en, 0.2) / 0.9, 1.0, 5.0);
      h = h_try / fac;
    }
  }
  return traj;
}

Trajectory evolve(const DensityMatrix& rho0, const VibronicOperator& hamiltonian,
                  const EmissionSpec& spec, const EvolutionConfig& config,
                  const std::optional<Vector>& target) {
  return evolve(rho0, MasterEquation(hamiltonian, spec), config, target);
}

SteadyStateResult steady_state_nullspace(const Matrix& liouvillian, FockSpace space,
                                         double rel_threshold) {
  if (space.levels() > kNullspaceMaxLevels) {
    throw InvalidArgument("steady_state_nullspace: " + std::to_string(space.levels()) +
                          " levels exceeds the null-space cap of " +
                          std::to_string(kNullspaceMaxLevels) + "; use time evolution instead");
  }
  const int dim = space.vibronic_dim();
  if (liouvillian.rows() != dim * dim || liouvillian.cols() != dim * dim)
    throw InvalidArgument("steady_state_nullspace: Liouvillian does not match the Fock space");

  SteadyStateResult result;
  Eigen::BDCSVD<Matrix> svd(liouvillian, Eigen::ComputeFullV);
  const Eigen::VectorXd& sv = svd.singularValues();  // descending
  const double norm = sv(0);
  if (norm == 0.0) {
    result.degenerate = true;
    result.liouvillian_nullity = dim * dim;
    result.kernel_dimension = dim;
    return result;
  }
  result.threshold = rel_threshold * norm;
  const Eigen::Index total = sv.size();
  Eigen::Index first_null = total;
  while (first_null > 0 && sv(first_null - 1) < result.threshold) --first_null;
  result.liouvillian_nullity = static_cast<int>(total - first_null);
  if (result.liouvillian_nullity == 0) {
    throw NumericalError("steady_state_nullspace: no steady state at this truncation (smallest singular value " +
                         std::to_string(sv(total - 1) / norm) + " of ||L||)");
  }
  result.largest_null_singular_value = sv(first_null);
  result.smallest_regular_singular_value = first_null > 0 ? sv(first_null - 1) : 0.0;

  // Hermitian basis of the kernel (L commutes with the adjoint map).
  std::vector<Matrix> hermitian;
  for (Eigen::Index c = first_null; c < total; ++c) {
    const Matrix x = Eigen::Map<const Matrix>(svd.matrixV().col(c).data(), dim, dim);
    for (const Matrix& candidate : {Matrix(0.5 * (x + x.adjoint())),
                                    Matrix(Complex(0.0, -0.5) * (x - x.adjoint()))}) {
      Matrix v = candidate;
      for (const Matrix& b : hermitian) v -= (b.cwiseProduct(v.conjugate()).sum().real()) * b;
      const double nv = v.norm();
      if (nv > 1e-6 && static_cast<int>(hermitian.size()) < result.liouvillian_nullity)
        hermitian.push_back(v / nv);
    }
  }

  Matrix support = Matrix::Zero(dim, dim);
  for (const Matrix& b : hermitian) {
    support += b * b;
    const Complex tr = b.trace();
    if (std::abs(tr) > 1e-8) result.states.push_back(b / tr.real());
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(support, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& w = solver.eigenvalues();
  const double w_max = w.maxCoeff();
  result.kernel_dimension = static_cast<int>((w.array() > 1e-8 * w_max).count());
  return result;
}

double fluorescence_rate(const Matrix& rho, double gamma, FockSpace space) {
  return gamma * excited_population(rho, space);
}

double purity(const Matrix& rho) {
  if (rho.rows() != rho.cols()) throw InvalidArgument("purity: matrix must be square");
  return rho.cwiseProduct(rho.transpose()).sum().real();
}

double fidelity(const Matrix& rho, const Vector& psi) {
  if (rho.rows() != psi.size() || rho.cols() != psi.size())
    throw InvalidArgument("fidelity: state dimensions differ");
  if (std::abs(psi.norm() - 1.0) > 1e-10) throw InvalidArgument("fidelity: pure state is not normalized");
  const DensityCheck c = check_density(rho);
  if (c.hermiticity > 1e-10 || c.trace_error > 1e-10 || c.min_eigenvalue < -1e-8)
    throw InvalidArgument("fidelity: argument is not a density matrix");
  return std::clamp((psi.adjoint() * rho * psi)(0).real(), 0.0, 1.0);
}

double fidelity(const Matrix& rho, const Matrix& sigma) {
  if (rho.rows() != sigma.rows() || rho.cols() != sigma.cols())
    throw InvalidArgument("fidelity: state dimensions differ");
  for (const Matrix* m : {&rho, &sigma}) {
    const DensityCheck c = check_density(*m);
    if (c.hermiticity > 1e-10 || c.trace_error > 1e-10 || c.min_eigenvalue < -1e-8)
      throw InvalidArgument("fidelity: argument is not a density matrix");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rho + rho.adjoint()));
  const Eigen::VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Matrix sqrt_rho = es.eigenvectors() * root.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
  const Matrix inner = sqrt_rho * (0.5 * (sigma + sigma.adjoint())) * sqrt_rho;
  Eigen::SelfAdjointEigenSolver<Matrix> es_inner(0.5 * (inner + inner.adjoint()), Eigen::EigenvaluesOnly);
  const double tr = es_inner.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  return std::clamp(tr * tr, 0.0, 1.0);
}

}  // namespace ionfilter
