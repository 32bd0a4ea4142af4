// Copyright 2026 The wkm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "wkm/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "wkm/error.hpp"

namespace wkm {

QuadratureRule gauss_hermite_normal(int order) {
  if (order < 1 || order > 200) {
    throw Error(ErrorCode::InvalidArgument, "Gauss-Hermite order must be in [1, 200]");
  }
  const int n = order;
  // Roots of the physicists' Hermite polynomial H_n by Newton's method on the
  // orthonormal recurrence, seeded with the usual asymptotic guesses.
  std::vector<double> x(n), w(n);
  const double pim4 = std::pow(std::numbers::pi, -0.25);
  const int m = (n + 1) / 2;
  double z = 0.0;
  for (int i = 0; i < m; ++i) {
    if (i == 0) {
      z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
    } else if (i == 1) {
      z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
    } else if (i == 2) {
      z = 1.86 * z - 0.86 * x[0];
    } else if (i == 3) {
      z = 1.91 * z - 0.91 * x[1];
    } else {
      z = 2.0 * z - x[i - 2];
    }
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = pim4;
      double p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= 1e-15 * std::max(1.0, std::abs(z))) break;
    }
    x[i] = z;
    x[n - 1 - i] = -z;
    w[i] = 2.0 / (pp * pp);
    w[n - 1 - i] = w[i];
  }

  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] = std::numbers::sqrt2 * x[n - 1 - i];
    rule.weights[i] = w[n - 1 - i] / std::sqrt(std::numbers::pi);
  }
  return rule;
}

double normal_expectation(const std::function<double(std::span<const double>)>& f, int dim,
                          int order) {
  if (dim < 1) throw Error(ErrorCode::InvalidArgument, "dimension must be >= 1");
  const auto rule = gauss_hermite_normal(order);
  const auto n = rule.nodes.size();
  std::vector<std::size_t> index(dim, 0);
  std::vector<double> point(dim);
  double total = 0.0;
  while (true) {
    double w = 1.0;
    for (int d = 0; d < dim; ++d) {
      point[d] = rule.nodes[index[d]];
      w *= rule.weights[index[d]];
    }
    total += w * f(point);
    int d = 0;
    while (d < dim && ++index[d] == n) index[d++] = 0;
    if (d == dim) break;
  }
  return total;
}

}  // namespace wkm
