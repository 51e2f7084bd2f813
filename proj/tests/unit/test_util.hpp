// Copyright 2026 The mtlb Authors
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

#ifndef MTLB_TESTS__TEST_UTIL_HPP_
#define MTLB_TESTS__TEST_UTIL_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "mtlb/core/autodiff.hpp"
#include "mtlb/core/parameter_store.hpp"
#include "mtlb/core/tensor.hpp"

namespace mtlb::testing
{

inline Tensor random_tensor(const Shape & shape, std::mt19937_64 & rng, double lo = -1.0, double hi = 1.0)
{
  std::uniform_real_distribution<double> u(lo, hi);
  Tensor t(shape);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = u(rng);
  return t;
}

inline double max_abs_diff(const Tensor & a, const Tensor & b)
{
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

/// ||a - b|| / max(||a||, ||b||, floor)
inline double norm_rel_err(const std::vector<double> & a, const std::vector<double> & b, double floor = 1e-8)
{
  double d = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    d += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return std::sqrt(d) / std::max({std::sqrt(na), std::sqrt(nb), floor});
}

using OpBuilder = std::function<Var(Graph &, const std::vector<Var> &)>;

/**
 * Central-difference check of d(scalar)/d(inputs) for a graph built from
 * variable leaves. Returns the worst elementwise |a - n| / max(|a|, |n|, floor).
 */
inline double op_gradient_error(
  const OpBuilder & build, const std::vector<Tensor> & inputs, double h = 1e-6, double floor = 1e-4)
{
  Graph g;
  std::vector<Var> leaves;
  for (const auto & t : inputs) leaves.push_back(g.variable(t));
  const Var out = build(g, leaves);
  g.backward(out);
  double worst = 0.0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const Tensor * analytic = g.grad(leaves[i]);
    for (std::size_t j = 0; j < inputs[i].size(); ++j) {
      auto eval = [&](double delta) {
        auto perturbed = inputs;
        perturbed[i][j] += delta;
        Graph ge;
        std::vector<Var> l;
        for (const auto & t : perturbed) l.push_back(ge.constant(t));
        return build(ge, l).value().item();
      };
      const double num = (eval(h) - eval(-h)) / (2.0 * h);
      const double ana = analytic != nullptr ? (*analytic)[j] : 0.0;
      worst = std::max(worst, std::abs(ana - num) / std::max({std::abs(ana), std::abs(num), floor}));
    }
  }
  return worst;
}

/// Per-tensor relative error of store gradients against central differences.
struct StoreGradReport
{
  double worst{0.0};
  std::string worst_name;
  std::size_t tensors{0};
  std::size_t scalars{0};
  // Tensors whose exact gradient is zero (e.g. attention key biases) have no
  // meaningful relative error; they are held to an absolute bound instead.
  std::size_t zero_tensors{0};
  double worst_zero_abs{0.0};
};

inline StoreGradReport store_gradient_error(
  ParameterStore & store, const std::function<Var(Graph &)> & loss, double h = 1e-5, double zero_tol = 1e-8)
{
  store.zero_grad();
  {
    Graph g;
    g.backward(loss(g), store);
  }
  auto value_of = [&]() {
    Graph g;
    g.set_grad_enabled(false);
    return loss(g).value().item();
  };
  StoreGradReport rep;
  for (auto & e : store.entries()) {
    if (!e.trainable) continue;
    std::vector<double> ana(e.value.size(), 0.0), num(e.value.size(), 0.0);
    if (e.grad) ana.assign(e.grad->data().begin(), e.grad->data().end());
    for (std::size_t j = 0; j < e.value.size(); ++j) {
      const double keep = e.value[j];
      e.value[j] = keep + h;
      const double up = value_of();
      e.value[j] = keep - h;
      const double down = value_of();
      e.value[j] = keep;
      num[j] = (up - down) / (2.0 * h);
    }
    double na = 0.0, nn = 0.0, diff = 0.0;
    for (std::size_t j = 0; j < ana.size(); ++j) {
      na += ana[j] * ana[j];
      nn += num[j] * num[j];
      diff += (ana[j] - num[j]) * (ana[j] - num[j]);
    }
    ++rep.tensors;
    rep.scalars += e.value.size();
    if (std::max(std::sqrt(na), std::sqrt(nn)) < zero_tol) {
      ++rep.zero_tensors;
      rep.worst_zero_abs = std::max(rep.worst_zero_abs, std::sqrt(diff));
      continue;
    }
    const double err = norm_rel_err(ana, num);
    if (err > rep.worst) {
      rep.worst = err;
      rep.worst_name = e.name;
    }
  }
  store.zero_grad();
  return rep;
}

}  // namespace mtlb::testing

#endif  // MTLB_TESTS__TEST_UTIL_HPP_
