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
#include <limits>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include <bregdecomp/constraint_set.hpp>
#include <bregdecomp/errors.hpp>
#include <bregdecomp/projection.hpp>

#include "oracles.hpp"
#include "test_util.hpp"

namespace bregdecomp {
namespace {

using testing::random_instance_2d;

ConstraintSet half(double a0, double a1, double b) { return ConstraintSet::halfspace(Eigen::Vector2d(a0, a1), b); }

/// Smallest ⟨∇Φ(q*) − ∇Φ(x), q − q*⟩ over feasible samples q; nonnegative at the projection.
double min_variational(const Potential& phi, const ConstraintSet& set, const Point& x, const Point& proj,
                       std::mt19937_64& rng) {
  const Eigen::VectorXd g = phi.gradient_unchecked(proj.coords) - phi.gradient_unchecked(x.coords);
  double worst = std::numeric_limits<double>::infinity();
  int found = 0;
  for (int k = 0; k < 20000 && found < 300; ++k) {
    const Point q = testing::random_point(phi, rng);
    if (contains(set, q, 0.0)) {
      worst = std::min(worst, g.dot(q.coords - proj.coords));
      ++found;
    }
  }
  return worst;
}

TEST(Project, FixedPointWhenFeasible) {
  const auto se = Potential::squared_euclidean(2);
  const Point x{-1.0, 0.5};
  EXPECT_EQ(project(se, half(1, 0, 0), x).coords, x.coords);
  const auto ne = Potential::negative_entropy(3);
  const Point y{0.2, 0.3, 0.5};
  EXPECT_EQ(project(ne, ConstraintSet::halfspace(Eigen::Vector3d(1, 0, 0), 0.4), y).coords, y.coords);
}

TEST(Project, Examples) {
  const Point p = project(Potential::squared_euclidean(2), half(1, 0, 0), Point{1.0, 1.0});
  EXPECT_NEAR(p[0], 0.0, 1e-15);
  EXPECT_NEAR(p[1], 1.0, 1e-15);
  const Point q = project(Potential::negative_entropy(2), half(1, 0, 0.3), Point{0.5, 0.5});
  EXPECT_NEAR(q[0], 0.3, 1e-9);
  EXPECT_NEAR(q[1], 0.7, 1e-9);
}

TEST(Project, EntropicHalfspaceMatchesOneDimensionalGrid) {
  // On the 2-simplex the feasible points of x1 ≤ 0.3 are (t, 1 − t) with t ≤ 0.3.
  const auto ne = Potential::negative_entropy(2);
  const Point x{0.5, 0.5};
  double best_t = 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 1; i <= 300000; ++i) {
    const double t = 1e-6 * i;
    const double f = divergence(ne, Point{t, 1.0 - t}, x);
    if (f < best) {
      best = f;
      best_t = t;
    }
  }
  EXPECT_NEAR(project(ne, half(1, 0, 0.3), x)[0], best_t, 1e-6);
}

TEST(Project, BoxAndAffineClosedForms) {
  const auto se = Potential::squared_euclidean(3);
  const Point p = project(se, ConstraintSet::box(Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(1, 1, 1)), Point{2.0, -1.0, 0.5});
  EXPECT_EQ(p.coords, Eigen::Vector3d(1, 0, 0.5));
  const auto aff = ConstraintSet::affine((Eigen::MatrixXd(1, 3) << 1, 1, 1).finished(), Eigen::VectorXd::Constant(1, 0.0));
  const Point a = project(se, aff, Point{1.0, 2.0, 3.0});
  EXPECT_NEAR((a.coords - Eigen::Vector3d(-1, 0, 1)).norm(), 0.0, 1e-12);
}

TEST(Project, WeightedEuclideanHalfspace) {
  // argmin ½Σw(q−x)² s.t. q1 + q2 ≤ 0 from (1, 1) with w = (1, 3): q = x − ν a / w.
  const auto se = Potential::squared_euclidean(2, Eigen::Vector2d(1, 3));
  const Point q = project(se, half(1, 1, 0), Point{1.0, 1.0});
  EXPECT_NEAR(q[0] + q[1], 0.0, 1e-12);
  EXPECT_NEAR(q[0] - 1.0, 3.0 * (q[1] - 1.0), 1e-12);
}

TEST(Project, RejectsGaussianPotentialAndBadInput) {
  EXPECT_THROW(project(Potential::gaussian_natural(), half(1, 0, 0), Point{0.0, 1.0}), InvalidInput);
  EXPECT_THROW(project(Potential::squared_euclidean(3), half(1, 0, 0), Point{0.0, 1.0, 2.0}), InvalidInput);
  EXPECT_THROW(project(Potential::negative_entropy(2), half(1, 0, 0.3), Point{0.7, 0.7}), InvalidInput);
}

TEST(Project, VariationalInequalityOnRandomInstances) {
  std::mt19937_64 rng(21);
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto inst = random_instance_2d(seed, 1);
    const Point p = project(inst.phi, inst.sets.front(), inst.x);
    EXPECT_TRUE(contains(inst.sets.front(), p, 1e-9));
    EXPECT_GE(min_variational(inst.phi, inst.sets.front(), inst.x, p, rng), -1e-8) << "seed " << seed;
  }
}

TEST(Project, Idempotent) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto inst = random_instance_2d(seed, 1);
    const Point p = project(inst.phi, inst.sets.front(), inst.x);
    const Point pp = project(inst.phi, inst.sets.front(), p);
    EXPECT_LE((pp.coords - p.coords).lpNorm<Eigen::Infinity>(), 2e-9) << "seed " << seed;
  }
}

TEST(Project, NestedSetsGiveLargerDivergence) {
  std::mt19937_64 rng(4);
  const auto se = Potential::squared_euclidean(2);
  const auto ne = Potential::negative_entropy(3);
  for (int trial = 0; trial < 50; ++trial) {
    const Point x{Eigen::VectorXd(testing::random_vector(rng, 2, 2.0))};
    double prev = 0.0;
    for (double b = 1.0; b >= -1.0; b -= 0.25) {
      const Point p = project(se, half(1, 2, b), x);
      const double d = divergence(se, p, x);
      EXPECT_GE(d, prev - 1e-9);
      prev = d;
    }
    const Point y = testing::random_simplex(rng, 3);
    prev = 0.0;
    for (double hi = 0.9; hi >= 0.1; hi -= 0.1) {
      const auto set = ConstraintSet::simplex_subset(Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(hi, 1, 1));
      const double d = divergence(ne, project(ne, set, y), y);
      EXPECT_GE(d, prev - 1e-9);
      prev = d;
    }
  }
}

TEST(Project, ClampsNearTheSimplexBoundaryWithWarning) {
  const auto ne = Potential::negative_entropy(3);
  const auto r = project_detailed(ne, ConstraintSet::halfspace(Eigen::Vector3d(1, 0, 0), 1e-14), Point{0.4, 0.3, 0.3});
  EXPECT_FALSE(r.warnings.empty());
  EXPECT_GE(r.point.coords.minCoeff(), 1e-12);
  EXPECT_NEAR(r.point.coords.sum(), 1.0, 1e-12);
}

TEST(ProjectIntersection, Examples) {
  const auto se = Potential::squared_euclidean(2);
  const Point x{1.0, 1.0};
  EXPECT_EQ(project_intersection(se, {ConstraintSet::whole(2)}, x).coords, x.coords);
  const Point p = project_intersection(se, {half(1, 0, 0), half(0, 1, 0)}, x);
  EXPECT_NEAR(p[0], 0.0, 1e-9);
  EXPECT_NEAR(p[1], 0.0, 1e-9);
}

TEST(ProjectIntersection, PlainAlternationWouldBeWrong) {
  // Alternating projections from (0, 2) stop at the feasible point (1.5, 0) after one sweep;
  // the minimizer over the intersection is the corner (1, 0).
  const auto se = Potential::squared_euclidean(2);
  const Point x{0.0, 2.0};
  const Point p = project_intersection(se, {half(-1, 1, -1), half(0, 1, 0)}, x);
  // Minimizer of ‖q − x‖ over {q2 ≤ q1 − 1, q2 ≤ 0} is (1, 0).
  EXPECT_NEAR(p[0], 1.0, 1e-7);
  EXPECT_NEAR(p[1], 0.0, 1e-7);
}

TEST(ProjectIntersection, SingleSetIsBitwiseProject) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto inst = random_instance_2d(seed, 1);
    EXPECT_EQ(project_intersection(inst.phi, inst.sets, inst.x).coords,
              project(inst.phi, inst.sets.front(), inst.x).coords);
  }
}

TEST(ProjectIntersection, MatchesGridOracle) {
  for (std::uint64_t seed = 100; seed < 110; ++seed) {
    const auto inst = random_instance_2d(seed, 3);
    const Point p = project_intersection(inst.phi, inst.sets, inst.x);
    for (const auto& s : inst.sets) {
      EXPECT_TRUE(contains(s, p, 1e-8));
    }
    const auto oracle = inst.oracle();
    EXPECT_NEAR(divergence(inst.phi, p, inst.x), oracle.value, 1e-4) << "seed " << seed;
    EXPECT_LE(divergence(inst.phi, p, inst.x), oracle.value + 1e-8) << "seed " << seed;
  }
}

TEST(ProjectIntersection, NonConvergenceCarriesLastIterate) {
  ProjectionOptions o;
  o.max_iterations = 1;
  try {
    project_intersection(Potential::squared_euclidean(2), {half(-1, 1, -1), half(0, 1, 0)}, Point{0.0, 2.0}, o);
    FAIL() << "expected ConvergenceError";
  } catch (const ConvergenceError& e) {
    EXPECT_EQ(e.last_iterate().size(), 2);
    EXPECT_GE(e.residual(), 0.0);
  }
}

TEST(ProjectIntersection, EmptyIntersectionIsRejected) {
  EXPECT_THROW(project_intersection(Potential::squared_euclidean(2), {half(1, 0, -1), half(-1, 0, -1)}, Point{0, 0}),
               AssumptionViolation);
  // Nonempty in the plane but disjoint from the simplex.
  EXPECT_THROW(project_intersection(Potential::negative_entropy(2), {half(1, 0, -0.5), half(0, 1, 2)}, Point{0.5, 0.5}),
               AssumptionViolation);
}

TEST(PythagoreanGap, Examples) {
  const auto se = Potential::squared_euclidean(3);
  const auto set = ConstraintSet::halfspace(Eigen::Vector3d(1, 1, 0), 0.0);
  const Point p{1.0, 1.0, 1.0};
  EXPECT_NEAR(pythagorean_gap(se, p, set, project(se, set, p)), 0.0, 1e-12);
  const auto aff = ConstraintSet::affine((Eigen::MatrixXd(1, 3) << 1, 2, 3).finished(), Eigen::VectorXd::Constant(1, 1.0));
  std::mt19937_64 rng(2);
  for (int k = 0; k < 100; ++k) {
    const Eigen::Vector3d free = testing::random_vector(rng, 3);
    const Eigen::Vector3d q = free - (free.dot(Eigen::Vector3d(1, 2, 3)) - 1.0) / 14.0 * Eigen::Vector3d(1, 2, 3);
    EXPECT_NEAR(pythagorean_gap(se, Point{testing::random_vector(rng, 3)}, aff, Point{Eigen::VectorXd(q)}), 0.0, 1e-10);
  }
  EXPECT_THROW(pythagorean_gap(se, p, set, Point{1.0, 1.0, 0.0}), InvalidInput);
}

TEST(PythagoreanGap, NonnegativeOnRandomHalfspaces) {
  std::mt19937_64 rng(9);
  for (const auto& phi : {Potential::squared_euclidean(3), Potential::negative_entropy(3)}) {
    for (int k = 0; k < 2000; ++k) {
      const Point p = testing::random_point(phi, rng);
      const Eigen::VectorXd a = testing::random_vector(rng, 3);
      const Point anchor = testing::random_point(phi, rng);
      const auto set = ConstraintSet::halfspace(a, a.dot(anchor.coords));
      Point q = testing::random_point(phi, rng);
      if (!contains(set, q, 0.0)) {
        q = anchor;
      }
      ASSERT_GE(pythagorean_gap(phi, p, set, q), -1e-8) << phi.name();
    }
  }
}

TEST(GConvexity, EuclideanConvexSetsAreGeodesicallyConvex) {
  const auto se = Potential::squared_euclidean(2);
  const auto r = gconvexity_check(se, ConstraintSet::intersection({half(1, 1, 1), half(-1, 2, 0.5)}), 50, 11, 3);
  EXPECT_EQ(r.fraction_feasible, 1.0);
  EXPECT_EQ(r.points_checked, 550U);
}

TEST(GConvexity, SimplexBoxOnTwoSimplex) {
  const auto ne = Potential::negative_entropy(2);
  const auto set = ConstraintSet::simplex_subset(Eigen::Vector2d(0.2, 0.1), Eigen::Vector2d(0.9, 0.8));
  EXPECT_EQ(gconvexity_check(ne, set, 100, 101, 5).fraction_feasible, 1.0);
}

TEST(GConvexity, DegenerateSinglePoint) {
  const auto se = Potential::squared_euclidean(2);
  const auto point = ConstraintSet::box(Eigen::Vector2d(1, 2), Eigen::Vector2d(1, 2));
  EXPECT_EQ(gconvexity_check(se, point, 10, 5, 1).fraction_feasible, 1.0);
}

TEST(GConvexity, DetectsEntropicNonconvexity) {
  // A halfspace through the simplex interior with a tilted normal need not be mirror-convex.
  const auto ne = Potential::negative_entropy(3);
  const auto set = ConstraintSet::halfspace(Eigen::Vector3d(1, -1, 0), 0.0);
  const auto r = gconvexity_check(ne, set, 400, 21, 8);
  EXPECT_GT(r.fraction_feasible, 0.0);
  EXPECT_LE(r.fraction_feasible, 1.0);
  EXPECT_THROW(gconvexity_check(ne, set, 0, 3, 1), InvalidInput);
}

TEST(NormalAlignment, Examples) {
  const auto se = Potential::squared_euclidean(2);
  const Point origin{0.0, 0.0};
  EXPECT_NEAR(normal_alignment(se, half(1, 0, 0), half(0, 1, 0), origin), 0.0, 1e-15);
  EXPECT_NEAR(normal_alignment(se, half(1, 0, 0), half(1, 0, 0), origin), 1.0, 1e-15);
  const double s = std::sqrt(0.5);
  EXPECT_NEAR(normal_alignment(se, half(1, 0, 0), half(s, s, 0), origin), s, 1e-12);
  EXPECT_THROW(normal_alignment(se, half(1, 0, 1), half(0, 1, 0), origin), UndefinedDiagnostic);
}

TEST(NormalAlignment, UsesTheMetric) {
  // With weights w, normals are compared in the inverse metric: cos = Σ u v / w / norms.
  const auto se = Potential::squared_euclidean(2, Eigen::Vector2d(1, 4));
  const double expected = (1.0 * 1.0 / 1.0 + 0.0) / std::sqrt(1.0 * (1.0 / 1.0 + 1.0 / 4.0));
  EXPECT_NEAR(normal_alignment(se, half(1, 0, 0), half(1, 1, 0), Point{0.0, 0.0}), expected, 1e-12);
}

}  // namespace
}  // namespace bregdecomp
