// Copyright 2026 The revjoint Authors. All Rights Reserved.
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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <numeric>
#include <string>
#include <vector>

#include "revjoint/error.hpp"

namespace revjoint {

struct LbfgsOptions {
  int max_iterations = 200;
  double gradient_tolerance = 1e-4;  // on the max-norm
  int history = 10;
  int max_line_search = 40;
  double armijo = 1e-4;
};

struct LbfgsResult {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> value_history;  // objective after each accepted step
};

namespace detail {

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

inline double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

inline bool all_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace detail

/// Minimizes a smooth function with limited-memory BFGS and a backtracking
/// Armijo line search. `fg(x, grad)` returns f(x) and fills grad. Throws
/// NumericError when the objective or gradient becomes non-finite.
template <typename ValueAndGradient>
LbfgsResult lbfgs_minimize(ValueAndGradient&& fg, std::vector<double> x,
                           const LbfgsOptions& opt = {}) {
  const std::size_t dim = x.size();
  std::vector<double> g(dim), g_new(dim), x_new(dim), dir(dim);
  double f = fg(x, g);
  auto check = [&](double value, const std::vector<double>& grad, int iter) {
    if (!std::isfinite(value) || !detail::all_finite(grad))
      throw NumericError("L-BFGS: non-finite objective or gradient at iteration " +
                         std::to_string(iter) + " (f=" + std::to_string(value) + ")");
  };
  check(f, g, 0);

  struct Pair {
    std::vector<double> s, y;
    double rho;
  };
  std::deque<Pair> mem;
  LbfgsResult res;
  res.value_history.push_back(f);

  for (int iter = 1; iter <= opt.max_iterations; ++iter) {
    if (detail::max_abs(g) < opt.gradient_tolerance) {
      res.converged = true;
      break;
    }
    // two-loop recursion
    dir = g;
    std::vector<double> alpha(mem.size());
    for (std::size_t k = mem.size(); k-- > 0;) {
      alpha[k] = mem[k].rho * detail::dot(mem[k].s, dir);
      for (std::size_t d = 0; d < dim; ++d) dir[d] -= alpha[k] * mem[k].y[d];
    }
    if (!mem.empty()) {
      const auto& last = mem.back();
      const double gamma = detail::dot(last.s, last.y) / detail::dot(last.y, last.y);
      for (double& v : dir) v *= gamma;
    } else {
      const double gn = std::sqrt(detail::dot(g, g));
      if (gn > 0) {
        for (double& v : dir) v /= gn;
      }
    }
    for (std::size_t k = 0; k < mem.size(); ++k) {
      const double beta = mem[k].rho * detail::dot(mem[k].y, dir);
      for (std::size_t d = 0; d < dim; ++d) dir[d] += mem[k].s[d] * (alpha[k] - beta);
    }
    for (double& v : dir) v = -v;

    double slope = detail::dot(g, dir);
    if (slope >= 0) {
      // not a descent direction; restart from steepest descent
      mem.clear();
      for (std::size_t d = 0; d < dim; ++d) dir[d] = -g[d];
      slope = detail::dot(g, dir);
    }

    double step = 1.0;
    double f_new = f;
    bool accepted = false;
    for (int ls = 0; ls < opt.max_line_search; ++ls) {
      for (std::size_t d = 0; d < dim; ++d) x_new[d] = x[d] + step * dir[d];
      f_new = fg(x_new, g_new);
      if (std::isfinite(f_new) && f_new <= f + opt.armijo * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      res.iterations = iter;
      break;  // no progress possible at working precision
    }
    check(f_new, g_new, iter);

    Pair p{std::vector<double>(dim), std::vector<double>(dim), 0.0};
    for (std::size_t d = 0; d < dim; ++d) {
      p.s[d] = x_new[d] - x[d];
      p.y[d] = g_new[d] - g[d];
    }
    const double sy = detail::dot(p.s, p.y);
    if (sy > 1e-12) {
      p.rho = 1.0 / sy;
      mem.push_back(std::move(p));
      if (static_cast<int>(mem.size()) > opt.history) mem.pop_front();
    }
    x.swap(x_new);
    g.swap(g_new);
    f = f_new;
    res.value_history.push_back(f);
    res.iterations = iter;
  }
  if (detail::max_abs(g) < opt.gradient_tolerance) res.converged = true;
  res.x = std::move(x);
  res.value = f;
  return res;
}

}  // namespace revjoint
