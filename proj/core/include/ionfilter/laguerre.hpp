#pragma once

#include <vector>

namespace ionfilter::laguerre {

/// Relative threshold below which a polynomial value is treated as an exact
/// zero when it later appears as a divisor.
inline constexpr double kEffectiveZero = 1e-8;

/// Highest degree for which the root finder is validated.
inline constexpr int kValidatedDegree = 40;

struct Evaluation {
  double value = 0.0;
  /// Magnitude of the two terms that cancel in the final recurrence step.
  /// Values much smaller than this are dominated by rounding.
  double scale = 1.0;

  bool effectively_zero(double rel = kEffectiveZero) const;
};

/// Generalized Laguerre polynomial L_n^{(alpha)}(x) by upward recurrence.
/// Throws InvalidArgument for negative n, alpha or x.
double eval(int n, int alpha, double x);

/// Same as eval() but also reports the cancellation scale of the last step.
Evaluation eval_with_scale(int n, int alpha, double x);

/// eval_with_scale at x = eta^2, with the square formed in extended
/// precision. Near a zero the value is very sensitive to rounding of x.
Evaluation eval_at_ldp(int n, int alpha, double eta);

/// d/dx L_n^{(alpha)}(x) = -L_{n-1}^{(alpha+1)}(x).
double derivative(int n, int alpha, double x);

/// All n zeros of L_n^{(alpha)}, ascending. Each is bracketed by the zeros of
/// degree n-1 (interlacing) and refined by safeguarded Newton iteration.
std::vector<double> zeros(int n, int alpha);

/// Lamb-Dicke parameter sqrt(x) placing eta^2 on the given zero.
double ldp_for_zero(int n, int alpha, int root_index);

}  // namespace ionfilter::laguerre
