#pragma once

/// Gauss-Legendre rules on [0,1] and tensor-product rules on the unit square.

#include <cmath>
#include <vector>

#include "vtm/core.hpp"

namespace vtm {

struct QuadratureRule1D {
  std::vector<double> points;  // in [0,1]
  std::vector<double> weights; // sum to 1
  int exact_degree = 0;        // highest polynomial degree integrated exactly
};

/// n-point Gauss-Legendre rule on [0,1], exact through degree 2n-1.
/// Nodes are found by Newton iteration on P_n with Chebyshev starting guesses.
inline QuadratureRule1D gauss_legendre(int n) {
  require(n >= 1 && n <= 64, "gauss_legendre: need 1 <= n <= 64");
  QuadratureRule1D rule;
  rule.points.resize(n);
  rule.weights.resize(n);
  rule.exact_degree = 2 * n - 1;
  for (int i = 0; i < n; ++i) {
    // root of P_n on [-1,1], highest first
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      // evaluate P_n and P_n' by recurrence
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      double pn = (n == 1) ? x : p1;
      double dpn = n * (x * pn - p0) / (x * x - 1.0);
      if (n == 1) { pn = x; dpn = 1.0; }
      double dx = pn / dpn;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    double dpn = (n == 1) ? 1.0 : n * (x * p1 - p0) / (x * x - 1.0);
    double w = 2.0 / ((1.0 - x * x) * dpn * dpn);
    // map [-1,1] -> [0,1]
    rule.points[n - 1 - i] = 0.5 * (x + 1.0);
    rule.weights[n - 1 - i] = 0.5 * w;
  }
  return rule;
}

struct QuadratureRule2D {
  std::vector<Vec2> points;    // in [0,1]^2
  std::vector<double> weights; // sum to 1
  int exact_degree = 0;        // per coordinate direction
  int size() const { return static_cast<int>(points.size()); }
};

/// Tensor-product Gauss rule exact for Q_{d,d} with d = exact_degree.
inline QuadratureRule2D tensor_gauss(int exact_degree) {
  require(exact_degree >= 0, "tensor_gauss: degree must be non-negative");
  int n = exact_degree / 2 + 1;
  QuadratureRule1D line = gauss_legendre(n);
  QuadratureRule2D rule;
  rule.exact_degree = line.exact_degree;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      rule.points.emplace_back(line.points[i], line.points[j]);
      rule.weights.push_back(line.weights[i] * line.weights[j]);
    }
  return rule;
}

} // namespace vtm
