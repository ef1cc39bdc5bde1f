#include "ionfilter/laguerre.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "ionfilter/error.hpp"

namespace ionfilter::laguerre {
namespace {

void require_valid(int n, int alpha, double x) {
  if (n < 0) throw InvalidArgument("laguerre: degree must be non-negative, got " + std::to_string(n));
  if (alpha < 0)
    throw InvalidArgument("laguerre: order must be non-negative, got " + std::to_string(alpha));
  if (!(x >= 0.0) || !std::isfinite(x))
    throw InvalidArgument("laguerre: argument must be finite and non-negative");
}

// Extended precision keeps values near a zero accurate relative to
// themselves; the dark-state ratios divide by exactly those values.
Evaluation recurrence(int n, int alpha, long double lx) {
  if (n == 0) return {1.0, 1.0};
  const long double a = alpha;
  long double prev = 1.0L;           // L_0
  long double curr = 1.0L + a - lx;  // L_1
  long double scale = 1.0L + a + lx;
  for (int k = 1; k < n; ++k) {
    const long double lhs = (2.0L * k + 1.0L + a - lx) * curr;
    const long double rhs = (k + a) * prev;
    const long double next = (lhs - rhs) / (k + 1.0L);
    scale = (std::abs(lhs) + std::abs(rhs)) / (k + 1.0L);
    prev = curr;
    curr = next;
  }
  return {static_cast<double>(curr), static_cast<double>(scale)};
}

// Safeguarded Newton inside a bracket [lo, hi] with a sign change.
double refine_root(int n, int alpha, double lo, double hi) {
  double f_lo = recurrence(n, alpha, lo).value;
  double f_hi = recurrence(n, alpha, hi).value;
  if (f_lo == 0.0) return lo;
  if (f_hi == 0.0) return hi;
  if ((f_lo > 0.0) == (f_hi > 0.0))
    throw NumericalError("laguerre: bracket without sign change at degree " + std::to_string(n));

  double x = 0.5 * (lo + hi);
  constexpr double eps = std::numeric_limits<double>::epsilon();
  for (int iter = 0; iter < 400; ++iter) {
    const double f = recurrence(n, alpha, x).value;
    if (f == 0.0) return x;
    if ((f > 0.0) == (f_lo > 0.0)) {
      lo = x;
      f_lo = f;
    } else {
      hi = x;
    }
    const double df = derivative(n, alpha, x);
    double candidate = (df != 0.0) ? x - f / df : 0.5 * (lo + hi);
    if (!(candidate > lo && candidate < hi)) candidate = 0.5 * (lo + hi);
    const double step = std::abs(candidate - x);
    x = candidate;
    if (step <= 2.0 * eps * std::abs(x) || hi - lo <= 2.0 * eps * std::abs(x)) break;
  }
  return x;
}

std::vector<double> closed_form(int n, int alpha) {
  const double a = alpha;
  if (n == 1) return {a + 1.0};
  const double center = a + 2.0;
  const double half_width = std::sqrt(a + 2.0);
  return {center - half_width, center + half_width};
}

}  // namespace

bool Evaluation::effectively_zero(double rel) const {
  return std::abs(value) < rel * scale;
}

double eval(int n, int alpha, double x) {
  require_valid(n, alpha, x);
  return recurrence(n, alpha, x).value;
}

Evaluation eval_with_scale(int n, int alpha, double x) {
  require_valid(n, alpha, x);
  return recurrence(n, alpha, x);
}

Evaluation eval_at_ldp(int n, int alpha, double eta) {
  require_valid(n, alpha, eta);
  return recurrence(n, alpha, static_cast<long double>(eta) * eta);
}

double derivative(int n, int alpha, double x) {
  require_valid(n, alpha, x);
  if (n == 0) return 0.0;
  return -recurrence(n - 1, alpha + 1, x).value;
}

std::vector<double> zeros(int n, int alpha) {
  if (n == 0) throw InvalidArgument("laguerre: no zeros exist for degree 0 (L_0 is constant)");
  require_valid(n, alpha, 0.0);

  std::vector<double> roots = closed_form(std::min(n, 2), alpha);
  if (n <= 2) {
    // Newton polish of the closed forms; degree one is already exact.
    if (n == 2) {
      for (double& r : roots) {
        const double width = 1e-6 * r;
        r = refine_root(2, alpha, r - width, r + width);
      }
    }
    return roots;
  }

  for (int degree = 3; degree <= n; ++degree) {
    std::vector<double> next;
    next.reserve(degree);
    double upper = 4.0 * degree + 2.0 * alpha + 2.0;
    while ((recurrence(degree, alpha, upper).value > 0.0) != (degree % 2 == 0)) upper *= 2.0;
    double lo = 0.0;
    for (int i = 0; i < degree; ++i) {
      const double hi = (i < degree - 1) ? roots[i] : upper;
      next.push_back(refine_root(degree, alpha, lo, hi));
      lo = hi;
    }
    roots = std::move(next);
  }
  return roots;
}

double ldp_for_zero(int n, int alpha, int root_index) {
  const auto roots = zeros(n, alpha);
  if (root_index < 0 || root_index >= n) {
    throw InvalidArgument("laguerre: root index " + std::to_string(root_index) +
                          " out of range for degree " + std::to_string(n));
  }
  return std::sqrt(roots[root_index]);
}

}  // namespace ionfilter::laguerre
