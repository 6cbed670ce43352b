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

#ifndef BREGDECOMP_TESTS_ORACLES_HPP
#define BREGDECOMP_TESTS_ORACLES_HPP

// Brute-force reference solutions shared by the unit tests and the acceptance binary. Nothing
// here calls a solver from the library; only set membership and the closed-form divergence.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include <bregdecomp/constraint_set.hpp>
#include <bregdecomp/potential.hpp>

#include "test_util.hpp"

namespace bregdecomp::testing {

/// Maps two free coordinates to a point: the identity in the plane, (u, v, 1 − u − v) on the 3-simplex.
inline Eigen::VectorXd chart(const Potential& phi, double u, double v) {
  if (phi.kind() == Potential::Kind::kNegativeEntropy) {
    return Eigen::Vector3d(u, v, 1.0 - u - v);
  }
  return Eigen::Vector2d(u, v);
}

struct GridResult {
  double value = std::numeric_limits<double>::infinity();
  Eigen::VectorXd point;
};

/**
 * min D(q‖x) over feasible q, by pattern search on nested grids (step 1e-2, 1e-3, 1e-4, 1e-5).
 * The first level scans the whole [lo, hi]² window; later levels scan ±20 steps around the
 * incumbent and re-centre until the incumbent stops moving.
 */
inline GridResult grid_oracle(const Potential& phi, const std::vector<ConstraintSet>& sets, const Point& x,
                              const Eigen::Vector2d& lo, const Eigen::Vector2d& hi) {
  auto objective = [&](double u, double v) {
    const Eigen::VectorXd q = chart(phi, u, v);
    if (!phi.domain_error(q).empty()) {
      return std::numeric_limits<double>::infinity();
    }
    for (const auto& s : sets) {
      if (violation(s, q) > 0.0) {
        return std::numeric_limits<double>::infinity();
      }
    }
    return divergence(phi, Point{q}, x);
  };
  double bu = 0.0;
  double bv = 0.0;
  double best = std::numeric_limits<double>::infinity();
  const double coarse = 1e-2;
  const int nu = static_cast<int>(std::ceil((hi(0) - lo(0)) / coarse));
  const int nv = static_cast<int>(std::ceil((hi(1) - lo(1)) / coarse));
  for (int i = 0; i <= nu; ++i) {
    for (int j = 0; j <= nv; ++j) {
      const double u = lo(0) + coarse * i;
      const double v = lo(1) + coarse * j;
      const double f = objective(u, v);
      if (f < best) {
        best = f;
        bu = u;
        bv = v;
      }
    }
  }
  for (const double step : {1e-3, 1e-4, 1e-5}) {
    for (int round = 0; round < 200; ++round) {
      const double cu = bu;
      const double cv = bv;
      for (int i = -20; i <= 20; ++i) {
        for (int j = -20; j <= 20; ++j) {
          const double f = objective(cu + step * i, cv + step * j);
          if (f < best) {
            best = f;
            bu = cu + step * i;
            bv = cv + step * j;
          }
        }
      }
      if (bu == cu && bv == cv) {
        break;
      }
    }
  }
  return {best, chart(phi, bu, bv)};
}

struct Instance2D {
  Potential phi;
  std::vector<ConstraintSet> sets;
  Point x;
  /// A point of every set, used only to bound the oracle's search window.
  Eigen::VectorXd anchor;

  /// Search window guaranteed to contain the projection: D(q‖x) ≤ D(anchor‖x) bounds ‖q − x‖.
  [[nodiscard]] std::pair<Eigen::Vector2d, Eigen::Vector2d> window() const {
    if (phi.kind() == Potential::Kind::kNegativeEntropy) {
      return {Eigen::Vector2d(0.0, 0.0), Eigen::Vector2d(1.0, 1.0)};
    }
    const double r = std::sqrt(2.0 * divergence(phi, Point{anchor}, x) / phi.weights().minCoeff()) + 0.05;
    return {x.coords.head<2>().array() - r, x.coords.head<2>().array() + r};
  }

  [[nodiscard]] GridResult oracle() const {
    const auto [lo, hi] = window();
    return grid_oracle(phi, sets, x, lo, hi);
  }
};

/**
 * A random two-dimensional projection problem with a nonempty feasible region. Even seeds use
 * squared Euclidean potentials in the plane (possibly weighted), odd seeds negative entropy on
 * the 3-simplex. Every constraint is built around a known interior point.
 */
inline Instance2D random_instance_2d(std::uint64_t seed, int n_sets) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const bool entropic = seed % 2 == 1;
  Potential phi = entropic ? Potential::negative_entropy(3)
                           : (seed % 4 == 2 ? Potential::squared_euclidean(2, Eigen::Vector2d(0.5 + unit(rng), 0.5 + unit(rng)))
                                            : Potential::squared_euclidean(2));
  const Eigen::VectorXd anchor =
      entropic ? random_simplex(rng, 3, 0.3).coords : Eigen::VectorXd(Eigen::Vector2d(unit(rng) - 0.5, unit(rng) - 0.5));
  std::vector<ConstraintSet> sets;
  for (int k = 0; k < n_sets; ++k) {
    const int kind = static_cast<int>(unit(rng) * 3.0);
    const auto d = anchor.size();
    if (kind == 0 || kind == 2) {
      Eigen::VectorXd a(d);
      for (auto& c : a) {
        c = normal(rng);
      }
      sets.push_back(ConstraintSet::halfspace(a, a.dot(anchor) + 0.05 * unit(rng)));
    } else if (entropic) {
      Eigen::VectorXd lo = (anchor.array() - 0.05 - 0.3 * unit(rng)).cwiseMax(0.0).matrix();
      Eigen::VectorXd hi = (anchor.array() + 0.05 + 0.3 * unit(rng)).cwiseMin(1.0).matrix();
      sets.push_back(ConstraintSet::simplex_subset(lo, hi));
    } else {
      Eigen::VectorXd lo(d);
      Eigen::VectorXd hi(d);
      for (Eigen::Index i = 0; i < d; ++i) {
        lo(i) = anchor(i) - 0.05 - unit(rng);
        hi(i) = anchor(i) + 0.05 + unit(rng);
      }
      sets.push_back(ConstraintSet::box(lo, hi));
    }
  }
  Point x = entropic ? random_simplex(rng, 3, 0.05) : Point{Eigen::VectorXd(random_vector(rng, 2, 1.5))};
  return {phi, sets, x, anchor};
}

/// Minimal weighted SSE over nondecreasing fits, by enumerating all contiguous partitions.
inline double isotonic_enumeration_sse(const std::vector<double>& ys, const std::vector<double>& ws) {
  const std::size_t n = ys.size();
  double best = std::numeric_limits<double>::infinity();
  for (std::uint64_t cuts = 0; cuts < (std::uint64_t{1} << (n - 1)); ++cuts) {
    std::vector<double> fit(n);
    std::size_t start = 0;
    double prev = -std::numeric_limits<double>::infinity();
    bool monotone = true;
    for (std::size_t i = 0; i < n && monotone; ++i) {
      const bool close = i == n - 1 || ((cuts >> i) & 1U) != 0;
      if (!close) {
        continue;
      }
      double wy = 0.0;
      double w = 0.0;
      for (std::size_t k = start; k <= i; ++k) {
        wy += ws[k] * ys[k];
        w += ws[k];
      }
      const double mean = wy / w;
      monotone = mean >= prev;
      prev = mean;
      std::fill(fit.begin() + static_cast<std::ptrdiff_t>(start), fit.begin() + static_cast<std::ptrdiff_t>(i) + 1,
                mean);
      start = i + 1;
    }
    if (!monotone) {
      continue;
    }
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sse += ws[i] * (ys[i] - fit[i]) * (ys[i] - fit[i]);
    }
    best = std::min(best, sse);
  }
  return best;
}

}  // namespace bregdecomp::testing

#endif  // BREGDECOMP_TESTS_ORACLES_HPP
