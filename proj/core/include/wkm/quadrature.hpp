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

#pragma once

#include <functional>
#include <span>
#include <vector>

namespace wkm {

/// Gauss-Hermite rule rescaled for expectations over a standard normal:
/// E[f(Z)] ~= sum_i weights[i] * f(nodes[i]), weights summing to 1.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

QuadratureRule gauss_hermite_normal(int order);

/// Tensor-product expectation of f over Z ~ Normal(0, I_dim).
double normal_expectation(const std::function<double(std::span<const double>)>& f, int dim,
                          int order);

}  // namespace wkm
