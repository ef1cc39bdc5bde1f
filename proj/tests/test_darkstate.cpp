#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "ionfilter/darkstate.hpp"
#include "ionfilter/laguerre.hpp"
#include "oracles.hpp"

using namespace ionfilter;

namespace {

DriveConfig drives(int j, int m, double eta_j, double eta_m, double om_j, double om_m) {
  DriveConfig c;
  c.drive_j = {j, om_j, eta_j};
  c.drive_m = {m, om_m, eta_m};
  return c;
}

double kernel_residual(const DriveConfig& c, FockSpace s, const Vector& v) {
  return (vibrational_kernel_operator(c, s) * v).norm();
}

double hamiltonian_residual(const DriveConfig& c, FockSpace s, const Vector& v) {
  return (build_interaction_hamiltonian(c, s).matrix() * embed(v)).norm();
}

}  // namespace

TEST(DarkState, QubitAmplitudeRatio) {
  const FockSpace s(30);
  const DarkStateResult r = dark_coefficients_adjacent(drives(1, 0, 0.5, 1.0, 0.2, 0.2), s);
  EXPECT_EQ(r.support_min, 0);
  EXPECT_EQ(r.support_max, 1);
  EXPECT_FALSE(r.truncation_limited);
  EXPECT_TRUE(r.converged);
  const Complex ratio = r.coefficients(1) / r.coefficients(0);
  EXPECT_NEAR(ratio.real(), -std::exp(-0.375), 1e-15);
  EXPECT_EQ(ratio.imag(), 0.0);
  for (int n = 2; n < 30; ++n) EXPECT_EQ(r.coefficients(n), Complex(0.0));
  EXPECT_NEAR(r.normalization, 1.0 + std::exp(-0.75), 1e-15);
}

TEST(DarkState, BandPassCollapsesToNumberState) {
  const FockSpace s(25);
  for (double om_m : {0.05, 0.2, 3.0}) {
    const DarkStateResult r = dark_coefficients_adjacent(
        drives(1, 0, std::sqrt(2.0), std::sqrt(2.0 - std::sqrt(2.0)), 0.2, om_m), s);
    EXPECT_EQ(r.support_min, 2);
    EXPECT_EQ(r.support_max, 2);
    EXPECT_EQ(r.coefficients(2), Complex(1.0));
    EXPECT_NEAR(r.coefficients.norm(), 1.0, 1e-15);
  }
}

TEST(DarkState, HighPassStartsAboveRoot) {
  const FockSpace s(30);
  const double eta_j = std::sqrt(2.0);  // L_1^{(1)}(2) = 0
  const DriveConfig c = drives(1, 0, eta_j, 0.5, 0.2, 0.04);
  const DarkStateResult r = dark_coefficients_adjacent(c, s);
  EXPECT_EQ(r.coefficients(0), Complex(0.0));
  EXPECT_EQ(r.coefficients(1), Complex(0.0));
  EXPECT_EQ(r.support_min, 2);
  EXPECT_TRUE(r.truncation_limited);
  EXPECT_TRUE(r.converged);
  const auto ref = oracle::product_coefficients_from(1, 0.04, 0.2, 0.5, eta_j, 30);
  long double norm = 0.0L;
  for (long double v : ref) norm += v * v;
  for (int n = 0; n < 30; ++n)
    EXPECT_NEAR(r.coefficients(n).real(), static_cast<double>(ref[n] / std::sqrt(norm)), 1e-13);
  EXPECT_NEAR(r.normalization, static_cast<double>(norm), 1e-12 * static_cast<double>(norm));
}

TEST(DarkState, LowPassCutsAtRoot) {
  const FockSpace s(20);
  const double eta_m = laguerre::ldp_for_zero(3, 0, 0);
  const DarkStateResult r = dark_coefficients_adjacent(drives(1, 0, 0.5, eta_m, 0.2, 0.2), s);
  EXPECT_EQ(r.support_min, 0);
  EXPECT_EQ(r.support_max, 3);
  for (int n = 4; n < 20; ++n) EXPECT_EQ(r.coefficients(n), Complex(0.0));
  EXPECT_LT(kernel_residual(drives(1, 0, 0.5, eta_m, 0.2, 0.2), s, r.coefficients), 1e-15);
}

TEST(DarkState, DivergentTailReported) {
  const FockSpace s(30);
  const DarkStateResult r = dark_coefficients_adjacent(drives(1, 0, std::sqrt(2.0), 0.5, 0.2, 0.2), s);
  EXPECT_TRUE(r.truncation_limited);
  EXPECT_FALSE(r.converged);
  EXPECT_GT(r.tail_weight, kTailTolerance);
}

TEST(DarkState, NonAdjacentOrdersPointToBasis) {
  try {
    dark_coefficients_adjacent(drives(2, 0, 0.5, 0.5, 0.2, 0.2), FockSpace(10));
    FAIL();
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("dark_space_basis"), std::string::npos);
  }
}

TEST(DarkState, HigherAdjacentOrdersStartAtM) {
  const FockSpace s(20);
  const DriveConfig c = drives(3, 2, 0.4, 0.6, 0.2, 0.05);
  const DarkStateResult r = dark_coefficients_adjacent(c, s);
  EXPECT_EQ(r.support_min, 2);
  EXPECT_LT(kernel_residual(c, s, r.coefficients), 1e-10);
  const DarkSpaceBasis b = dark_space_basis(c, s);
  EXPECT_EQ(b.dimension, 3);  // |0>, |1> and the chain
}

TEST(DarkState, BasisMatchesRecurrenceForAdjacentOrders) {
  const FockSpace s(20);
  const DriveConfig c = drives(1, 0, 0.7, 0.5, 0.2, 0.03);
  const DarkSpaceBasis b = dark_space_basis(c, s);
  ASSERT_EQ(b.dimension, 1);
  const Vector v = dark_coefficients_adjacent(c, s).coefficients;
  EXPECT_LT((b.basis[0] - v).norm(), 1e-10);
}

TEST(DarkState, SpacingTwoSplitsByParity) {
  const FockSpace s(20);
  const DriveConfig c = drives(2, 0, 0.5, 0.5, 0.2, 0.004);
  const DarkSpaceBasis b = dark_space_basis(c, s);
  ASSERT_EQ(b.dimension, 2);
  EXPECT_EQ(b.residue[0], 0);
  EXPECT_EQ(b.residue[1], 1);
  for (int i = 0; i < 2; ++i) {
    for (int n = 0; n < 20; ++n)
      if (n % 2 != b.residue[i]) EXPECT_EQ(b.basis[i](n), Complex(0.0));
    EXPECT_LT(kernel_residual(c, s, b.basis[i]), 1e-10 * b.kernel_norm);
  }
  EXPECT_NEAR(std::abs(b.basis[0].dot(b.basis[1])), 0.0, 1e-15);
}

TEST(DarkState, SingleDriveKernelIsGround) {
  const FockSpace s(15);
  const DarkSpaceBasis b = dark_space_basis(drives(1, 0, 0.5, 0.5, 0.2, 0.0), s);
  ASSERT_EQ(b.dimension, 1);
  EXPECT_NEAR(std::abs(b.basis[0](0)), 1.0, 1e-15);
}

TEST(DarkState, EmptyKernelIsReported) {
  EXPECT_THROW(dark_space_basis(drives(1, 0, 0.5, 0.5, 0.2, 2.0), FockSpace(20)), NumericalError);
}

TEST(DarkStateProperty, KernelConsistencyOnRandomConfigs) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> eta(0.2, 1.5), ratio(0.05, 0.5);
  const FockSpace s(30);
  for (int trial = 0; trial < 40; ++trial) {
    const DriveConfig c = drives(1, 0, eta(rng), eta(rng), 0.2, 0.2 * ratio(rng));
    const DarkStateResult r = dark_coefficients_adjacent(c, s);
    EXPECT_NEAR(r.coefficients.norm(), 1.0, 1e-14);
    if (!r.converged) continue;
    const double bound = 1e-10;
    EXPECT_LT(kernel_residual(c, s, r.coefficients), bound);
    EXPECT_LT(hamiltonian_residual(c, s, r.coefficients), bound);
  }
}

TEST(Design, QubitInvertsAmplitudeFormula) {
  DesignOptions o;
  o.free_eta = 0.5;
  const Design d = design_filter(Qubit{1.0, -1}, o);
  EXPECT_NEAR(std::abs(d.config.drive_m.rabi) / std::abs(d.config.drive_j.rabi), std::exp(0.375), 1e-15);
  EXPECT_EQ(d.config.drive_m.lamb_dicke, 1.0);
  const Vector& c = d.predicted.coefficients;
  EXPECT_NEAR((c(1) / c(0)).real(), -1.0, 1e-15);
  const Design plus = design_filter(Qubit{0.5, +1}, o);
  EXPECT_NEAR((plus.predicted.coefficients(1) / plus.predicted.coefficients(0)).real(), 0.5, 1e-15);
}

TEST(Design, NumberStateTwoLambDickeParameters) {
  const Design d = design_filter(NumberState{2}, {});
  EXPECT_NEAR(d.config.drive_j.lamb_dicke, std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(d.config.drive_m.lamb_dicke, std::sqrt(2.0 - std::sqrt(2.0)), 1e-15);
  EXPECT_EQ(d.predicted.support_min, 2);
  EXPECT_EQ(d.predicted.support_max, 2);
}

TEST(Design, LowPassOnePinsEtaToOne) {
  const Design d = design_filter(LowPass{1}, {});
  EXPECT_EQ(d.config.drive_m.lamb_dicke, 1.0);
  EXPECT_EQ(d.predicted.support_max, 1);
}

TEST(Design, NumberStateOneIsUndesignable) {
  try {
    design_filter(NumberState{1}, {});
    FAIL();
  } catch (const UndesignableError& e) {
    EXPECT_NE(std::string(e.what()).find("undesignable: L_0^{(1)} has no zero"), std::string::npos);
    EXPECT_EQ(e.kind(), ErrorKind::Undesignable);
  }
}

TEST(Design, NumberStateZeroIsSidebandCooling) {
  DesignOptions o;
  o.levels = 20;
  const Design d = design_filter(NumberState{0}, o);
  EXPECT_EQ(d.config.drive_m.rabi, Complex(0.0));
  EXPECT_EQ(d.predicted.support_min, 0);
  EXPECT_EQ(d.predicted.support_max, 0);
  const DarkSpaceBasis b = dark_space_basis(d.config, FockSpace(20));
  ASSERT_EQ(b.dimension, 1);
  EXPECT_NEAR(std::abs(b.basis[0](0)), 1.0, 1e-15);
}

TEST(DesignProperty, RoundTripSupportsMatchZones) {
  DesignOptions o;
  o.levels = 30;
  o.rabi_ratio = 0.2;
  const std::vector<FilterSpec> specs = {LowPass{1}, LowPass{3}, LowPass{6}, BandPass{1, 4}, BandPass{2, 5},
                                         NumberState{2}, NumberState{5}, HighPass{1}, HighPass{2}};
  for (const FilterSpec& spec : specs) {
    const Design d = design_filter(spec, o);
    const auto [lo, hi] = zone_bounds(spec, o.levels);
    EXPECT_EQ(d.predicted.support_min, lo) << describe(spec);
    if (std::holds_alternative<HighPass>(spec)) {
      EXPECT_TRUE(d.predicted.truncation_limited) << describe(spec);
    } else {
      EXPECT_EQ(d.predicted.support_max, hi) << describe(spec);
    }
    EXPECT_TRUE(d.predicted.warnings.empty()) << describe(spec);
    const RealVector p = d.predicted.coefficients.cwiseAbs2();
    EXPECT_LT(out_of_zone_population(p, spec), 1e-8) << describe(spec);
  }
}

TEST(Design, AlternativeRootsAreSelectable) {
  DesignOptions o;
  o.zeros.m_root = 1;
  const Design d = design_filter(LowPass{3}, o);
  EXPECT_NEAR(d.config.drive_m.lamb_dicke, std::sqrt(laguerre::zeros(3, 0)[1]), 1e-15);
  EXPECT_EQ(d.predicted.support_max, 3);
  o.zeros.m_root = 3;
  EXPECT_THROW(design_filter(LowPass{3}, o), InvalidArgument);
}

TEST(Design, SpecValidation) {
  EXPECT_THROW(validate(FilterSpec{LowPass{0}}), InvalidArgument);
  EXPECT_THROW(validate(FilterSpec{BandPass{3, 3}}), InvalidArgument);
  EXPECT_THROW(validate(FilterSpec{Qubit{-1.0, -1}}), InvalidArgument);
  EXPECT_THROW(zone_bounds(LowPass{40}, 30), InvalidArgument);
  EXPECT_EQ(describe(BandPass{2, 5}), "band-pass(2,5)");
}

TEST(Design, MeasuredRatioFromDensity) {
  Vector v = Vector::Zero(5);
  v(0) = 2.0 / std::sqrt(5.0);
  v(1) = -1.0 / std::sqrt(5.0);
  const Matrix rho = embed(Matrix(v * v.adjoint()));
  EXPECT_NEAR(measured_amplitude_ratio(rho, FockSpace(5)), 0.5, 1e-14);
}

TEST(Design, VerifyRunsEvolutionAndNullspace) {
  DesignOptions o;
  o.levels = 12;
  const Design d = design_filter(Qubit{0.8, -1}, o);
  EmissionSpec em;
  em.eta_e = 1.0;
  EvolutionConfig ev;
  ev.t_final = 100.0;
  ev.sample_stride = 10.0;
  const VerificationReport rep = verify_design(d, em, ev, 0.1);
  ASSERT_TRUE(rep.kernel_dimension.has_value());
  EXPECT_EQ(*rep.kernel_dimension, 1);
  EXPECT_GT(*rep.nullspace_fidelity, 1.0 - 1e-8);
  EXPECT_GT(rep.evolution_fidelity, 0.9);
  EXPECT_NEAR(rep.final_time, 100.0, 1e-9);
}
