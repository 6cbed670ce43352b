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

#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include <bregdecomp/errors.hpp>
#include <bregdecomp/potential.hpp>

#include "test_util.hpp"

namespace bregdecomp {
namespace {

using testing::random_point;

std::vector<Potential> all_potentials() {
  return {Potential::squared_euclidean(3), Potential::squared_euclidean(3, Eigen::Vector3d(0.5, 2.0, 1.0)),
          Potential::negative_entropy(2), Potential::negative_entropy(4), Potential::gaussian_natural()};
}

TEST(PotentialValue, Examples) {
  EXPECT_EQ(potential_value(Potential::squared_euclidean(2), Point{0.0, 0.0}), 0.0);
  EXPECT_NEAR(potential_value(Potential::negative_entropy(2), Point{0.5, 0.5}), -std::log(2.0), 1e-15);
  EXPECT_DOUBLE_EQ(potential_value(Potential::squared_euclidean(2), Point{1.0, 2.0}), 2.5);
}

TEST(PotentialValue, RejectsOutOfDomain) {
  const auto ne = Potential::negative_entropy(2);
  EXPECT_THROW(potential_value(ne, Point{0.6, 0.6}), InvalidInput);
  EXPECT_THROW(potential_value(ne, Point{1.0, 0.0}), InvalidInput);
  EXPECT_THROW(potential_value(ne, Point{1.0 - 1e-13, 1e-13}), InvalidInput);
  EXPECT_THROW(potential_value(Potential::gaussian_natural(), Point{0.0, 0.0}), InvalidInput);
  EXPECT_THROW(potential_value(Potential::squared_euclidean(2), Point{1.0}), InvalidInput);
  EXPECT_THROW(Potential::negative_entropy(1), InvalidInput);
  EXPECT_THROW(Potential::squared_euclidean(2, Eigen::Vector2d(1.0, 0.0)), InvalidInput);
}

TEST(Gradient, Examples) {
  const auto g = gradient(Potential::squared_euclidean(2), Point{1.0, 2.0});
  EXPECT_EQ(g[0], 1.0);
  EXPECT_EQ(g[1], 2.0);
  const auto h = gradient(Potential::negative_entropy(2), Point{0.5, 0.5});
  EXPECT_NEAR(h[0], std::log(0.5) + 1.0, 1e-15);
  EXPECT_NEAR(h[1], std::log(0.5) + 1.0, 1e-15);
}

TEST(Gradient, MatchesCentralDifferences) {
  std::mt19937_64 rng(7);
  const double h = 1e-6;
  for (const auto& phi : all_potentials()) {
    for (int trial = 0; trial < 50; ++trial) {
      const Point x = random_point(phi, rng);
      const Eigen::VectorXd g = gradient(phi, x).coords;
      if (phi.kind() == Potential::Kind::kGaussianNatural) {
        // Φ is a function of the expectation parameters η = (m, m² + v).
        const Eigen::VectorXd eta = gaussian_moments(x);
        for (Eigen::Index i = 0; i < 2; ++i) {
          Eigen::VectorXd up = eta;
          Eigen::VectorXd dn = eta;
          up(i) += h;
          dn(i) -= h;
          const double fd = (potential_value(phi, gaussian_from_moments(up)) -
                             potential_value(phi, gaussian_from_moments(dn))) /
                            (2.0 * h);
          EXPECT_LE(std::abs(fd - g(i)), 1e-5 * std::max(1.0, std::abs(g(i))));
        }
        continue;
      }
      for (Eigen::Index i = 0; i < x.coords.size(); ++i) {
        Eigen::VectorXd up = x.coords;
        Eigen::VectorXd dn = x.coords;
        up(i) += h;
        dn(i) -= h;
        const double fd = (phi.value_unchecked(up) - phi.value_unchecked(dn)) / (2.0 * h);
        EXPECT_LE(std::abs(fd - g(i)), 1e-5 * std::max(1.0, std::abs(g(i))));
      }
    }
  }
}

TEST(GradientInverse, Examples) {
  const auto x = gradient_inverse(Potential::squared_euclidean(2), DualPoint{3.0, -1.0});
  EXPECT_EQ(x[0], 3.0);
  EXPECT_EQ(x[1], -1.0);
  const auto ne = Potential::negative_entropy(2);
  const auto y = gradient_inverse(ne, gradient(ne, Point{0.25, 0.75}));
  EXPECT_NEAR(y[0], 0.25, 1e-15);
  EXPECT_NEAR(y[1], 0.75, 1e-15);
}

TEST(GradientInverse, RejectsDualOutsideRange) {
  const auto ne = Potential::negative_entropy(2);
  EXPECT_THROW(gradient_inverse(ne, DualPoint{0.0, 0.0}), InvalidInput);
  EXPECT_THROW(gradient_inverse(ne, DualPoint{1.0}), InvalidInput);
  EXPECT_THROW(gradient_inverse(Potential::gaussian_natural(), DualPoint{0.0, 0.5}), InvalidInput);
}

TEST(GradientInverse, RoundTrip) {
  std::mt19937_64 rng(11);
  for (const auto& phi : all_potentials()) {
    for (int trial = 0; trial < 1000; ++trial) {
      const Point x = random_point(phi, rng);
      const Point back = gradient_inverse(phi, gradient(phi, x));
      EXPECT_LE((back.coords - x.coords).lpNorm<Eigen::Infinity>(), 1e-10) << phi.name();
      const DualPoint d = gradient(phi, back);
      EXPECT_LE((d.coords - gradient(phi, x).coords).lpNorm<Eigen::Infinity>(), 1e-10) << phi.name();
    }
  }
}

TEST(Divergence, Examples) {
  EXPECT_DOUBLE_EQ(divergence(Potential::squared_euclidean(2), Point{1.0, 2.0}, Point{0.0, 0.0}), 2.5);
  const double kl = 0.5 * std::log(0.5 / 0.25) + 0.5 * std::log(0.5 / 0.75);
  EXPECT_NEAR(divergence(Potential::negative_entropy(2), Point{0.5, 0.5}, Point{0.25, 0.75}), kl, 1e-15);
  EXPECT_NEAR(kl, 0.143841, 1e-6);
}

TEST(Divergence, MatchesDefinition) {
  std::mt19937_64 rng(5);
  for (const auto& phi : all_potentials()) {
    for (int trial = 0; trial < 200; ++trial) {
      const Point p = random_point(phi, rng);
      const Point q = random_point(phi, rng);
      double direct = 0.0;
      if (phi.kind() == Potential::Kind::kGaussianNatural) {
        const Eigen::VectorXd ep = gaussian_moments(p);
        const Eigen::VectorXd eq = gaussian_moments(q);
        direct = potential_value(phi, p) - potential_value(phi, q) - gradient(phi, q).coords.dot(ep - eq);
      } else {
        direct = potential_value(phi, p) - potential_value(phi, q) - gradient(phi, q).coords.dot(p.coords - q.coords);
      }
      EXPECT_NEAR(divergence(phi, p, q), direct, 1e-10 * std::max(1.0, std::abs(direct))) << phi.name();
    }
  }
}

TEST(Divergence, NonnegativeAndIdentity) {
  std::mt19937_64 rng(3);
  for (const auto& phi : all_potentials()) {
    for (int trial = 0; trial < 10000; ++trial) {
      const Point p = random_point(phi, rng);
      const Point q = random_point(phi, rng);
      ASSERT_GE(divergence(phi, p, q), -1e-12) << phi.name();
      ASSERT_LE(divergence(phi, p, p), 1e-12) << phi.name();
    }
  }
}

TEST(GaussianKl, Examples) {
  EXPECT_EQ(gaussian_kl(0.0, 1.0, 0.0, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(gaussian_kl(1.0, 1.0, 0.0, 1.0), 0.5);
  EXPECT_NEAR(gaussian_kl(0.0, 2.0, 0.0, 1.0), 0.5 * (0.5 - 1.0 - std::log(0.5)), 1e-15);
  EXPECT_NEAR(gaussian_kl(0.0, 2.0, 0.0, 1.0), 0.096574, 1e-6);
  EXPECT_THROW(gaussian_kl(0.0, 0.0, 0.0, 1.0), InvalidInput);
  EXPECT_THROW(gaussian_kl(0.0, 1.0, 0.0, -1.0), InvalidInput);
}

TEST(GaussianKl, IsTheGaussianPotentialDivergence) {
  const auto phi = Potential::gaussian_natural();
  EXPECT_DOUBLE_EQ(divergence(phi, Point{0.0, 1.0}, Point{1.0, 1.0}), gaussian_kl(1.0, 1.0, 0.0, 1.0));
  EXPECT_DOUBLE_EQ(divergence(phi, Point{0.3, 1.5}, Point{-1.0, 0.7}), gaussian_kl(-1.0, 0.7, 0.3, 1.5));
}

TEST(Geodesic, Examples) {
  const auto se = Potential::squared_euclidean(2);
  const Point x{0.0, 0.0};
  const Point y{2.0, 2.0};
  EXPECT_EQ(geodesic(se, x, y, 0.0).coords, x.coords);
  EXPECT_EQ(geodesic(se, x, y, 1.0).coords, y.coords);
  const Point mid = geodesic(se, x, y, 0.5);
  EXPECT_DOUBLE_EQ(mid[0], 1.0);
  EXPECT_DOUBLE_EQ(mid[1], 1.0);
  EXPECT_THROW(geodesic(se, x, y, 1.5), InvalidInput);
}

TEST(Geodesic, EntropicPathStaysOnSimplex) {
  std::mt19937_64 rng(13);
  const auto ne = Potential::negative_entropy(5);
  for (int trial = 0; trial < 200; ++trial) {
    const Point x = random_point(ne, rng);
    const Point y = random_point(ne, rng);
    EXPECT_LE((geodesic(ne, x, y, 0.0).coords - x.coords).lpNorm<Eigen::Infinity>(), 1e-10);
    EXPECT_LE((geodesic(ne, x, y, 1.0).coords - y.coords).lpNorm<Eigen::Infinity>(), 1e-10);
    for (const double t : {0.1, 0.37, 0.5, 0.9}) {
      const Point g = geodesic(ne, x, y, t);
      EXPECT_NEAR(g.coords.sum(), 1.0, 1e-10);
      EXPECT_GT(g.coords.minCoeff(), 0.0);
    }
  }
}

}  // namespace
}  // namespace bregdecomp
