#include "ionfilter/darkstate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "ionfilter/laguerre.hpp"

namespace ionfilter {
namespace {

constexpr double kRescaleAbove = 1e100;
constexpr double kNearZeroWarning = 1e-4;

void require_levels(const DriveConfig& config, FockSpace space, const char* what) {
  if (space.levels() <= config.j())
    throw InvalidArgument(std::string(what) + ": truncation below sideband order: " +
                          std::to_string(space.levels()) + " levels cannot carry a sideband of order " +
                          std::to_string(config.j()));
}

std::string near_zero_message(const char* which, int n, int alpha, const laguerre::Evaluation& e) {
  std::ostringstream os;
  os << "near-zero Laguerre " << which << " L_" << n << "^(" << alpha << ") = " << e.value
     << " (scale " << e.scale << ")";
  return os.str();
}

// Rotate the global phase so the first significant coefficient is real positive.
void fix_phase(Vector& v) {
  const double big = v.cwiseAbs().maxCoeff();
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    if (std::abs(v(k)) > 1e-8 * big) {
      v *= std::conj(v(k)) / std::abs(v(k));
      return;
    }
  }
}

}  // namespace

DarkStateResult dark_coefficients_adjacent(const DriveConfig& config, FockSpace space) {
  config.validate();
  if (config.spacing() != 1) {
    throw InvalidArgument("dark_coefficients_adjacent: sideband orders j=" + std::to_string(config.j()) +
                          ", m=" + std::to_string(config.m()) +
                          " are not adjacent; use dark_space_basis for j - m >= 2");
  }
  require_levels(config, space, "dark_coefficients_adjacent");
  if (std::abs(config.drive_j.rabi) == 0.0)
    throw InvalidArgument("dark_coefficients_adjacent: Omega_j must be nonzero");

  const int n_levels = space.levels();
  const int m = config.m();
  const int j = config.j();
  const double xm = config.drive_m.lamb_dicke * config.drive_m.lamb_dicke;
  const double xj = config.drive_j.lamb_dicke * config.drive_j.lamb_dicke;
  const Complex g = config.drive_m.rabi * std::exp(-0.5 * xm) / (config.drive_j.rabi * std::exp(-0.5 * xj));

  DarkStateResult result;
  Vector c = Vector::Zero(n_levels);
  int start = m;
  c(start) = 1.0;
  double log_scale = 0.0;
  bool terminated = g == Complex(0.0);
  int end = start;

  for (int n = 0; !terminated && n + m + 1 < n_levels; ++n) {
    const int k = n + m;
    const laguerre::Evaluation lm = laguerre::eval_at_ldp(n, m, config.drive_m.lamb_dicke);
    const laguerre::Evaluation lj = laguerre::eval_at_ldp(n, j, config.drive_j.lamb_dicke);
    if (lj.effectively_zero()) {
      if (lm.effectively_zero())
        result.warnings.push_back("both Laguerre factors vanish at n=" + std::to_string(n) +
                                  "; the chain restarts above it");
      // Row n forces C_k = 0: everything below restarts at k + 1.
      c.segment(start, k + 1 - start).setZero();
      start = k + 1;
      c(start) = 1.0;
      log_scale = 0.0;
      end = start;
      continue;
    }
    if (lm.effectively_zero()) {
      terminated = true;
      break;
    }
    if (std::abs(lj.value) < kNearZeroWarning * lj.scale)
      result.warnings.push_back(near_zero_message("divisor", n, j, lj));
    if (std::abs(lm.value) < kNearZeroWarning * lm.scale)
      result.warnings.push_back(near_zero_message("numerator", n, m, lm));

    c(k + 1) = -g * std::sqrt(static_cast<double>(k + 1)) * (lm.value / lj.value) * c(k);
    end = k + 1;
    const double mag = std::abs(c(k + 1));
    if (mag > kRescaleAbove) {
      c.segment(start, k + 2 - start) /= mag;
      log_scale += std::log(mag);
    }
  }
  if (!terminated) end = n_levels - 1;

  result.support_min = start;
  result.support_max = end;
  result.truncation_limited = !terminated;

  const double sum = c.squaredNorm();
  result.normalization = std::exp(std::log(sum) + 2.0 * log_scale);
  if (!std::isfinite(result.normalization))
    result.warnings.push_back("normalization constant overflows a double");
  c /= std::sqrt(sum);
  result.coefficients = std::move(c);

  if (result.truncation_limited) {
    const int top = n_levels - 1;
    result.tail_weight = std::norm(result.coefficients(top)) +
                         (top - 1 >= start ? std::norm(result.coefficients(top - 1)) : 0.0);
    result.converged = result.tail_weight < kTailTolerance;
  }
  return result;
}

DarkSpaceBasis dark_space_basis(const DriveConfig& config, FockSpace space, double rel_threshold) {
  config.validate();
  require_levels(config, space, "dark_space_basis");
  const Matrix k = vibrational_kernel_operator(config, space);
  const int n_levels = space.levels();
  const int d = config.spacing();

  DarkSpaceBasis out;
  Eigen::BDCSVD<Matrix> full(k);
  out.kernel_norm = full.singularValues()(0);
  out.threshold = rel_threshold * out.kernel_norm;

  for (int r = 0; r < d; ++r) {
    std::vector<int> cols;
    for (int n = r; n < n_levels; n += d) cols.push_back(n);
    Matrix sub(n_levels, static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) sub.col(static_cast<Eigen::Index>(c)) = k.col(cols[c]);
    Eigen::BDCSVD<Matrix> svd(sub, Eigen::ComputeFullV);
    const Eigen::VectorXd& sv = svd.singularValues();
    double smallest_regular = 0.0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
      if (out.kernel_norm > 0.0 && sv(i) >= out.threshold) {
        smallest_regular = sv(i);
        continue;
      }
      Vector v = Vector::Zero(n_levels);
      for (std::size_t c = 0; c < cols.size(); ++c) v(cols[c]) = svd.matrixV()(static_cast<Eigen::Index>(c), i);
      v.normalize();
      fix_phase(v);
      out.basis.push_back(std::move(v));
      out.residue.push_back(r);
    }
    out.smallest_regular.push_back(smallest_regular);
  }
  out.dimension = static_cast<int>(out.basis.size());
  if (out.dimension == 0) {
    double smallest = out.kernel_norm;
    for (double s : out.smallest_regular) smallest = std::min(smallest, s);
    std::ostringstream os;
    os << "dark_space_basis: empty kernel within the truncation of " << n_levels
       << " levels (smallest singular value " << smallest / out.kernel_norm
       << " of ||K||, cutoff " << rel_threshold
       << "); this may be a truncation artifact, try more levels or a smaller Omega_m/Omega_j";
    throw NumericalError(os.str());
  }
  return out;
}

void validate(const FilterSpec& spec) {
  std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, LowPass>) {
          if (s.q < 1) throw InvalidArgument("LowPass: q must be >= 1");
        } else if constexpr (std::is_same_v<T, HighPass>) {
          if (s.p < 1) throw InvalidArgument("HighPass: p must be >= 1");
        } else if constexpr (std::is_same_v<T, BandPass>) {
          if (s.p < 1 || s.q <= s.p) throw InvalidArgument("BandPass: requires q > p >= 1");
        } else if constexpr (std::is_same_v<T, NumberState>) {
          if (s.q < 0) throw InvalidArgument("NumberState: q must be >= 0");
        } else {
          if (!(s.ratio > 0.0) || !std::isfinite(s.ratio))
            throw InvalidArgument("Qubit: amplitude ratio must be positive and finite");
          if (s.sign != 1 && s.sign != -1) throw InvalidArgument("Qubit: sign must be +1 or -1");
        }
      },
      spec);
}

std::string describe(const FilterSpec& spec) {
  return std::visit(
      [](const auto& s) -> std::string {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, LowPass>) {
          return "low-pass(" + std::to_string(s.q) + ")";
        } else if constexpr (std::is_same_v<T, HighPass>) {
          return "high-pass(" + std::to_string(s.p) + ")";
        } else if constexpr (std::is_same_v<T, BandPass>) {
          return "band-pass(" + std::to_string(s.p) + "," + std::to_string(s.q) + ")";
        } else if constexpr (std::is_same_v<T, NumberState>) {
          return "number-state(" + std::to_string(s.q) + ")";
        } else {
          std::ostringstream os;
          os << "qubit(ratio=" << s.ratio << ",sign=" << (s.sign > 0 ? "+" : "-") << ")";
          return os.str();
        }
      },
      spec);
}

std::pair<int, int> zone_bounds(const FilterSpec& spec, int levels) {
  validate(spec);
  const std::pair<int, int> z = std::visit(
      [levels](const auto& s) -> std::pair<int, int> {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, LowPass>) {
          return {0, s.q};
        } else if constexpr (std::is_same_v<T, HighPass>) {
          return {s.p + 1, levels - 1};
        } else if constexpr (std::is_same_v<T, BandPass>) {
          return {s.p + 1, s.q};
        } else if constexpr (std::is_same_v<T, NumberState>) {
          return {s.q, s.q};
        } else {
          return {0, 1};
        }
      },
      spec);
  if (z.second >= levels || z.first > z.second)
    throw InvalidArgument("zone " + describe(spec) + " does not fit in " + std::to_string(levels) +
                          " levels");
  return z;
}

double out_of_zone_population(const RealVector& populations, const FilterSpec& spec) {
  const auto [lo, hi] = zone_bounds(spec, static_cast<int>(populations.size()));
  double out = 0.0;
  for (Eigen::Index n = 0; n < populations.size(); ++n)
    if (n < lo || n > hi) out += populations(n);
  return out;
}

Design design_filter(const FilterSpec& spec, const DesignOptions& options) {
  validate(spec);
  if (options.levels < 2) throw InvalidArgument("design_filter: need at least 2 levels");
  if (!(std::abs(options.rabi_j) > 0.0) || !std::isfinite(options.rabi_j))
    throw InvalidArgument("design_filter: rabi_j must be nonzero and finite");
  if (!std::isfinite(options.rabi_ratio))
    throw InvalidArgument("design_filter: rabi_ratio must be finite");
  if (!(options.free_eta > 0.0) || !std::isfinite(options.free_eta))
    throw InvalidArgument("design_filter: free_eta must be positive");

  Design design;
  design.spec = spec;
  DriveConfig& cfg = design.config;
  cfg.drive_j = {1, options.rabi_j, options.free_eta};
  cfg.drive_m = {0, options.rabi_ratio * options.rabi_j, options.free_eta};
  const ZeroChoices& z = options.zeros;

  auto pin_low = [&](int q) { cfg.drive_m.lamb_dicke = laguerre::ldp_for_zero(q, 0, z.m_root); };
  auto pin_high = [&](int p) { cfg.drive_j.lamb_dicke = laguerre::ldp_for_zero(p, 1, z.j_root); };

  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, LowPass>) {
          pin_low(s.q);
        } else if constexpr (std::is_same_v<T, HighPass>) {
          pin_high(s.p);
        } else if constexpr (std::is_same_v<T, BandPass>) {
          pin_high(s.p);
          pin_low(s.q);
        } else if constexpr (std::is_same_v<T, NumberState>) {
          if (s.q == 1)
            throw UndesignableError(
                "undesignable: L_0^{(1)} has no zero, so the chain cannot start at |1>");
          if (s.q == 0) {
            // Plain red-sideband cooling: a single drive whose kernel is |0>.
            cfg.drive_m.rabi = 0.0;
          } else {
            pin_high(s.q - 1);
            pin_low(s.q);
          }
        } else {
          cfg.drive_m.lamb_dicke = 1.0;
          const double eta1 = cfg.drive_j.lamb_dicke;
          const double magnitude = s.ratio * std::exp(0.5 * (1.0 - eta1 * eta1));
          cfg.drive_m.rabi = -static_cast<double>(s.sign) * magnitude * cfg.drive_j.rabi;
        }
      },
      spec);

  const FockSpace space(options.levels);
  const auto [lo, hi] = zone_bounds(spec, options.levels);
  design.predicted = dark_coefficients_adjacent(cfg, space);
  const DarkStateResult& p = design.predicted;
  const bool open_top = std::holds_alternative<HighPass>(spec);
  if (p.support_min != lo || (open_top ? !p.truncation_limited : p.support_max != hi)) {
    design.predicted.warnings.push_back(
        "predicted support [" + std::to_string(p.support_min) + "," + std::to_string(p.support_max) +
        "] differs from the requested zone [" + std::to_string(lo) + "," + std::to_string(hi) +
        "]; the free Lamb-Dicke parameter hits another Laguerre zero");
  }
  return design;
}

double measured_amplitude_ratio(const Matrix& rho, FockSpace space) {
  const int n = space.levels();
  if (rho.rows() != 2 * n && rho.rows() != n)
    throw InvalidArgument("measured_amplitude_ratio: dimension does not match the Fock space");
  const Matrix ground = rho.topLeftCorner(n, n);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (ground + ground.adjoint()));
  const Vector v = solver.eigenvectors().col(n - 1);
  if (std::abs(v(0)) < 1e-12)
    throw NumericalError("measured_amplitude_ratio: dominant state has no |0> component");
  return std::abs(v(1)) / std::abs(v(0));
}

VerificationReport verify_design(const Design& design, const EmissionSpec& emission,
                                 const EvolutionConfig& evolution, double initial_nbar) {
  const FockSpace space(static_cast<int>(design.predicted.coefficients.size()));
  const VibronicOperator h = build_interaction_hamiltonian(design.config, space);
  const DensityMatrix rho0(embed(thermal_state(initial_nbar, space).matrix()));
  const Vector target = embed(design.predicted.coefficients);

  VerificationReport report;
  report.trajectory = evolve(rho0, h, emission, evolution, target);
  const Matrix& rho = report.trajectory.final_state().matrix();
  const ObservableRecord& last = report.trajectory.final_observables();
  report.evolution_fidelity = last.fidelity.value_or(0.0);
  report.final_fluorescence = last.fluorescence;
  report.final_time = last.time;
  report.reached_steady = report.trajectory.reached_steady;
  report.out_of_zone = out_of_zone_population(last.fock_populations, design.spec);
  if (std::holds_alternative<Qubit>(design.spec)) report.measured_ratio = measured_amplitude_ratio(rho, space);

  if (space.levels() <= kNullspaceMaxLevels) {
    const Matrix l = build_liouvillian(h, emission, space, 2 * kNullspaceMaxLevels);
    const SteadyStateResult steady = steady_state_nullspace(l, space);
    report.kernel_dimension = steady.kernel_dimension;
    if (steady.states.size() == 1)
      report.nullspace_fidelity = std::clamp((target.adjoint() * steady.states[0] * target)(0).real(), 0.0, 1.0);
  }
  return report;
}

}  // namespace ionfilter
