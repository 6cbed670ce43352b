// Copyright 2026 The bregdecomp Authors.
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

#ifndef BREGDECOMP_CALIBRATION_HPP
#define BREGDECOMP_CALIBRATION_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <bregdecomp/errors.hpp>

namespace bregdecomp {

/// Nondecreasing right-continuous step function with flat extrapolation.
struct MonotoneCurve {
  std::vector<double> knots;
  std::vector<double> values;
  /// Total weight pooled at each knot.
  std::vector<double> weights;

  [[nodiscard]] double operator()(double x) const {
    if (knots.empty()) {
      throw InvalidInput("MonotoneCurve: empty curve");
    }
    const auto it = std::upper_bound(knots.begin(), knots.end(), x);
    if (it == knots.begin()) {
      return values.front();
    }
    return values[static_cast<std::size_t>(std::distance(knots.begin(), it)) - 1];
  }
};

/**
 * Weighted least-squares nondecreasing fit by pool-adjacent-violators. Tied x values are
 * pooled into one weighted point first, so the curve has one knot per distinct x.
 */
inline MonotoneCurve isotonic_fit(std::span<const double> xs, std::span<const double> ys,
                                  std::span<const double> weights) {
  if (xs.size() != ys.size() || xs.size() != weights.size()) {
    throw InvalidInput("isotonic_fit: xs, ys and weights must have equal length");
  }
  if (xs.empty()) {
    throw InvalidInput("isotonic_fit: need at least one point");
  }
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(weights[i] > 0.0) || !std::isfinite(weights[i])) {
      throw InvalidInput("isotonic_fit: weights must be finite and positive");
    }
    if (!std::isfinite(xs[i]) || !std::isfinite(ys[i])) {
      throw InvalidInput("isotonic_fit: non-finite input");
    }
  }
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });

  // Blocks of (knot range, weighted sum, weight); ties pooled on the way in.
  struct Block {
    std::size_t first_knot;
    std::size_t last_knot;
    double wy;
    double w;
    [[nodiscard]] double mean() const { return wy / w; }
  };
  MonotoneCurve curve;
  std::vector<Block> stack;
  for (const std::size_t i : order) {
    if (!curve.knots.empty() && curve.knots.back() == xs[i]) {
      curve.weights.back() += weights[i];
      Block& top = stack.back();
      top.wy += weights[i] * ys[i];
      top.w += weights[i];
    } else {
      curve.knots.push_back(xs[i]);
      curve.weights.push_back(weights[i]);
      const std::size_t k = curve.knots.size() - 1;
      stack.push_back({k, k, weights[i] * ys[i], weights[i]});
    }
    while (stack.size() > 1 && stack[stack.size() - 2].mean() > stack.back().mean()) {
      Block top = stack.back();
      stack.pop_back();
      Block& prev = stack.back();
      prev.last_knot = top.last_knot;
      prev.wy += top.wy;
      prev.w += top.w;
    }
  }
  curve.values.resize(curve.knots.size());
  for (const auto& b : stack) {
    std::fill(curve.values.begin() + static_cast<std::ptrdiff_t>(b.first_knot),
              curve.values.begin() + static_cast<std::ptrdiff_t>(b.last_knot) + 1, b.mean());
  }
  return curve;
}

/// One graded run: latency parameter, order sensitivity, measured excess loss.
struct GradedObservation {
  double lam = 0.0;
  double eps = 0.0;
  double loss = 0.0;
  double weight = 1.0;
};

struct ResidualCell {
  double lam;
  double eps;
  double mean_loss;
  /// mean_loss − baseline − g1(λ) − g2(ε); negative values are kept.
  double residual;
};

struct PenaltySurfaces {
  MonotoneCurve g1_curve;
  MonotoneCurve g2_curve;
  /// Weighted mean loss at the origin (λ, ε) = (0, 0); 0 when the origin was not observed.
  double baseline = 0.0;
  std::vector<ResidualCell> interaction_residual;
  std::vector<std::string> warnings;
};

namespace detail {

inline MonotoneCurve fit_slice(const std::vector<GradedObservation>& obs, bool along_lam, const char* name) {
  std::vector<double> xs;
  std::vector<double> ys;
  std::vector<double> ws;
  for (const auto& o : obs) {
    if ((along_lam ? o.eps : o.lam) == 0.0) {
      xs.push_back(along_lam ? o.lam : o.eps);
      ys.push_back(o.loss);
      ws.push_back(o.weight);
    }
  }
  std::vector<double> distinct = xs;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < 2) {
    throw InvalidInput(std::string("fit_penalty_surfaces: ") + name + " is unidentifiable: the " +
                       (along_lam ? "eps = 0" : "lam = 0") + " slice needs at least two distinct " +
                       (along_lam ? "lam" : "eps") + " values");
  }
  MonotoneCurve c = isotonic_fit(xs, ys, ws);
  if (c.knots.front() == 0.0) {
    const double anchor = c.values.front();
    for (auto& v : c.values) {
      v -= anchor;
    }
  }
  return c;
}

}  // namespace detail

/**
 * Fits g1 on the ε = 0 slice and g2 on the λ = 0 slice, each anchored to 0 at the origin, and
 * reports the interaction residual on every observed (λ, ε) cell. The residual is reported
 * unconstrained; no subadditivity bounds are imposed.
 */
inline PenaltySurfaces fit_penalty_surfaces(const std::vector<GradedObservation>& obs) {
  for (const auto& o : obs) {
    if (!(o.lam >= 0.0) || !(o.eps >= 0.0) || !(o.weight > 0.0) || !std::isfinite(o.loss) ||
        !std::isfinite(o.lam) || !std::isfinite(o.eps)) {
      throw InvalidInput("fit_penalty_surfaces: need lam, eps >= 0, weight > 0 and finite values");
    }
  }
  PenaltySurfaces out;
  out.g1_curve = detail::fit_slice(obs, true, "g1");
  out.g2_curve = detail::fit_slice(obs, false, "g2");

  std::map<std::pair<double, double>, std::pair<double, double>> cells;
  for (const auto& o : obs) {
    auto& [wy, w] = cells[{o.lam, o.eps}];
    wy += o.weight * o.loss;
    w += o.weight;
  }
  if (const auto it = cells.find({0.0, 0.0}); it != cells.end()) {
    out.baseline = it->second.first / it->second.second;
  } else {
    out.warnings.emplace_back("origin (0, 0) not observed; residuals use baseline 0");
  }
  for (const auto& [key, acc] : cells) {
    const double mean = acc.first / acc.second;
    out.interaction_residual.push_back(
        {key.first, key.second, mean, mean - out.baseline - out.g1_curve(key.first) - out.g2_curve(key.second)});
  }
  return out;
}

}  // namespace bregdecomp

#endif  // BREGDECOMP_CALIBRATION_HPP
