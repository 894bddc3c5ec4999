// SPDX-FileCopyrightText: Copyright (c) 2026 The dualmg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Core>

#include "dualmg/types.hpp"

namespace dualmg {

/// Quadrature nodes and weights in physical (or reference) coordinates.
template <typename Scalar, int Dim>
struct QuadratureRule {
  std::vector<Eigen::Matrix<Scalar, Dim, 1>> points;
  std::vector<Scalar> weights;

  [[nodiscard]] std::size_t size() const { return points.size(); }
};

/// Gauss-Legendre rule with n points on [0, 1].
template <typename Scalar = double>
QuadratureRule<Scalar, 1> gauss_legendre_unit(int n) {
  QuadratureRule<Scalar, 1> rule;
  rule.points.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    // Newton iteration on P_n from the Chebyshev-like initial guess.
    Scalar x = std::cos(std::numbers::pi_v<Scalar> * (Scalar(i) + Scalar(0.75)) / (Scalar(n) + Scalar(0.5)));
    Scalar dp = 0;
    for (int it = 0; it < 100; ++it) {
      Scalar p0 = 1, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const Scalar p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const Scalar pn = n == 0 ? Scalar(1) : p1;
      dp = n * (x * pn - p0) / (x * x - 1);
      const Scalar dx = pn / dp;
      x -= dx;
      if (std::abs(dx) < Scalar(1e-16)) break;
    }
    {
      Scalar p0 = 1, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const Scalar p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1);
    }
    rule.points[i](0) = (Scalar(1) - x) / 2;
    rule.weights[i] = Scalar(1) / ((Scalar(1) - x * x) * dp * dp);
  }
  return rule;
}

/// Rule on the reference triangle (0,0),(1,0),(0,1), exact for total degree
/// `order`. Built as a collapsed (Duffy) product of Gauss-Legendre rules.
template <typename Scalar = double>
QuadratureRule<Scalar, 2> reference_triangle_rule(int order) {
  if (order != 2 && order != 4 && order != 6) {
    throw Error("quadrature: unsupported order " + std::to_string(order));
  }
  // The Duffy Jacobian adds one degree in the collapsed direction.
  const int n = (order + 2) / 2 + (order % 2);
  const auto line = gauss_legendre_unit<Scalar>(n);
  QuadratureRule<Scalar, 2> rule;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const Scalar s = line.points[i](0);
      const Scalar t = line.points[j](0);
      rule.points.emplace_back(s, t * (1 - s));
      rule.weights.push_back(line.weights[i] * line.weights[j] * (1 - s));
    }
  }
  return rule;
}

/// Rule mapped onto the triangle with vertices a, b, c. Weights sum to its area.
template <typename Scalar = double>
QuadratureRule<Scalar, 2> quadrature(const Eigen::Matrix<Scalar, 2, 1>& a, const Eigen::Matrix<Scalar, 2, 1>& b,
                                     const Eigen::Matrix<Scalar, 2, 1>& c, int order) {
  auto rule = reference_triangle_rule<Scalar>(order);
  const Scalar det = (b - a)(0) * (c - a)(1) - (b - a)(1) * (c - a)(0);
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const auto xi = rule.points[q];
    rule.points[q] = a + xi(0) * (b - a) + xi(1) * (c - a);
    rule.weights[q] *= std::abs(det);
  }
  return rule;
}

}  // namespace dualmg
