#pragma once

#include <vector>

namespace ionfilter {

/// Nodes and weights on [-1, 1]; exact for polynomials of degree 2*order - 1.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

QuadratureRule gauss_legendre(int order);

}  // namespace ionfilter
