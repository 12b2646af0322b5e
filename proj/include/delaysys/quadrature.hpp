#pragma once

#include <vector>

namespace delaysys {

struct GaussRule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;  // sum to 2
};

/// n-point Gauss-Legendre rule (cached per n).
const GaussRule& gauss_legendre(int n);

}  // namespace delaysys
