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

#ifndef BREGDECOMP_CONSTRAINT_SET_HPP
#define BREGDECOMP_CONSTRAINT_SET_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include <bregdecomp/errors.hpp>
#include <bregdecomp/potential.hpp>

namespace bregdecomp {

class ConstraintSet;

/// The whole space.
struct Unconstrained {
  std::size_t dim;
};

/// ⟨a, x⟩ ≤ b.
struct Halfspace {
  Eigen::VectorXd a;
  double b;
};

/// lo ≤ x ≤ hi componentwise.
struct Box {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
};

/// A x = c.
struct AffineEquality {
  Eigen::MatrixXd A;
  Eigen::VectorXd c;
};

/// Points of the probability simplex (Σx = 1) with lo ≤ x ≤ hi.
struct SimplexSubset {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
};

struct Intersection {
  std::vector<ConstraintSet> members;
};

/// Settings shared by the projection solvers.
struct ProjectionOptions {
  int max_iterations = 10000;
  /// Convergence threshold on the max primal change per sweep and on the feasibility residual.
  double tolerance = 1e-9;
  /// Simplex coordinates are never driven below this value.
  double interior_margin = 1e-12;

  void validate() const {
    if (max_iterations < 1) {
      throw InvalidInput("ProjectionOptions: max_iterations must be >= 1");
    }
    if (!(tolerance > 0.0)) {
      throw InvalidInput("ProjectionOptions: tolerance must be positive");
    }
    if (!(interior_margin >= 0.0)) {
      throw InvalidInput("ProjectionOptions: interior_margin must be nonnegative");
    }
  }
};

/// A nonempty closed convex set. Construct through the static factories, which validate.
class ConstraintSet {
 public:
  using Variant = std::variant<Unconstrained, Halfspace, Box, AffineEquality, SimplexSubset, Intersection>;

  static ConstraintSet whole(std::size_t dim) { return ConstraintSet{Unconstrained{dim}}; }

  static ConstraintSet halfspace(Eigen::VectorXd a, double b) {
    if (a.size() == 0 || !a.allFinite() || !std::isfinite(b)) {
      throw InvalidInput("halfspace: normal and offset must be finite");
    }
    if (a.lpNorm<Eigen::Infinity>() == 0.0) {
      throw InvalidInput("halfspace: normal must be nonzero");
    }
    return ConstraintSet{Halfspace{std::move(a), b}};
  }

  static ConstraintSet box(Eigen::VectorXd lo, Eigen::VectorXd hi) {
    check_bounds(lo, hi, "box");
    return ConstraintSet{Box{std::move(lo), std::move(hi)}};
  }

  static ConstraintSet affine(Eigen::MatrixXd A, Eigen::VectorXd c) {
    if (A.rows() == 0 || A.cols() == 0 || A.rows() != c.size() || !A.allFinite() || !c.allFinite()) {
      throw InvalidInput("affine: A must be a finite nonempty matrix with one row per entry of c");
    }
    const Eigen::VectorXd x = A.completeOrthogonalDecomposition().solve(c);
    const double residual = (A * x - c).lpNorm<Eigen::Infinity>();
    if (residual > 1e-9 * std::max(1.0, c.lpNorm<Eigen::Infinity>())) {
      throw InvalidInput("affine: inconsistent system A x = c");
    }
    return ConstraintSet{AffineEquality{std::move(A), std::move(c)}};
  }

  static ConstraintSet simplex_subset(Eigen::VectorXd lo, Eigen::VectorXd hi) {
    check_bounds(lo, hi, "simplex_subset");
    if (lo.size() < 2 || lo.minCoeff() < 0.0) {
      throw InvalidInput("simplex_subset: need dimension >= 2 and nonnegative lower bounds");
    }
    if (lo.sum() > 1.0 + 1e-12 || hi.cwiseMin(1.0).sum() < 1.0 - 1e-12) {
      throw InvalidInput("simplex_subset: bounds exclude every point of the simplex");
    }
    return ConstraintSet{SimplexSubset{std::move(lo), std::move(hi)}};
  }

  /**
   * Intersection of `members`, flattened. Nonemptiness is verified with a Euclidean Dykstra
   * feasibility pass; an empty intersection throws AssumptionViolation.
   */
  static ConstraintSet intersection(std::vector<ConstraintSet> members);

  [[nodiscard]] const Variant& variant() const noexcept { return v_; }
  [[nodiscard]] std::size_t dim() const;
  [[nodiscard]] bool is_intersection() const noexcept { return std::holds_alternative<Intersection>(v_); }

  /// Non-intersection members, or the set itself for a primitive.
  [[nodiscard]] std::vector<ConstraintSet> flatten() const {
    if (const auto* in = std::get_if<Intersection>(&v_)) {
      return in->members;
    }
    return {*this};
  }

 private:
  explicit ConstraintSet(Variant v) : v_(std::move(v)) {}

  static void check_bounds(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi, const char* where) {
    if (lo.size() == 0 || lo.size() != hi.size()) {
      throw InvalidInput(std::string(where) + ": bounds must be nonempty and of equal length");
    }
    for (Eigen::Index i = 0; i < lo.size(); ++i) {
      if (std::isnan(lo(i)) || std::isnan(hi(i)) || lo(i) > hi(i)) {
        throw InvalidInput(std::string(where) + ": lo must not exceed hi");
      }
    }
  }

  Variant v_;
};

inline std::size_t ConstraintSet::dim() const {
  struct Visitor {
    std::size_t operator()(const Unconstrained& s) const { return s.dim; }
    std::size_t operator()(const Halfspace& s) const { return static_cast<std::size_t>(s.a.size()); }
    std::size_t operator()(const Box& s) const { return static_cast<std::size_t>(s.lo.size()); }
    std::size_t operator()(const AffineEquality& s) const { return static_cast<std::size_t>(s.A.cols()); }
    std::size_t operator()(const SimplexSubset& s) const { return static_cast<std::size_t>(s.lo.size()); }
    std::size_t operator()(const Intersection& s) const { return s.members.empty() ? 0 : s.members.front().dim(); }
  };
  return std::visit(Visitor{}, v_);
}

/// Largest constraint violation of x (0 when feasible).
inline double violation(const ConstraintSet& set, const Eigen::VectorXd& x) {
  if (static_cast<std::size_t>(x.size()) != set.dim()) {
    throw InvalidInput("violation: dimension mismatch between point and set");
  }
  struct Visitor {
    const Eigen::VectorXd& x;
    double operator()(const Unconstrained&) const { return 0.0; }
    double operator()(const Halfspace& s) const { return std::max(0.0, s.a.dot(x) - s.b); }
    double operator()(const Box& s) const {
      return std::max({0.0, (s.lo - x).maxCoeff(), (x - s.hi).maxCoeff()});
    }
    double operator()(const AffineEquality& s) const { return (s.A * x - s.c).lpNorm<Eigen::Infinity>(); }
    double operator()(const SimplexSubset& s) const {
      return std::max({0.0, (s.lo - x).maxCoeff(), (x - s.hi).maxCoeff(), std::abs(x.sum() - 1.0)});
    }
    double operator()(const Intersection& s) const {
      double worst = 0.0;
      for (const auto& m : s.members) {
        worst = std::max(worst, violation(m, x));
      }
      return worst;
    }
  };
  return std::visit(Visitor{x}, set.variant());
}

/// True iff every constraint holds within `tol`.
inline bool contains(const ConstraintSet& set, const Point& x, double tol = 1e-9) {
  return violation(set, x.coords) <= tol;
}

namespace detail {

/// Solves Σ clamp(center_i − τ · scale_i, lo_i, hi_i) = 1 for τ; the sum is nonincreasing in τ.
template <class ClampedSum>
double solve_decreasing(ClampedSum&& sum_at, double target) {
  double lo = -1.0;
  double hi = 1.0;
  for (int i = 0; i < 2000 && sum_at(lo) < target; ++i) {
    lo *= 2.0;
  }
  for (int i = 0; i < 2000 && sum_at(hi) > target; ++i) {
    hi *= 2.0;
  }
  for (int i = 0; i < 400; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) {
      break;
    }
    if (sum_at(mid) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Weighted Euclidean projection onto {Σx = 1, lo ≤ x ≤ hi}.
inline Eigen::VectorXd euclidean_capped_simplex(const Eigen::VectorXd& y, const Eigen::VectorXd& lo,
                                                const Eigen::VectorXd& hi, const Eigen::VectorXd& w) {
  auto at = [&](double tau) {
    return (y.array() - tau / w.array()).max(lo.array()).min(hi.array()).matrix().eval();
  };
  const double tau = solve_decreasing([&](double t) { return at(t).sum(); }, 1.0);
  return at(tau);
}

/// Weighted Euclidean projection onto a primitive set.
inline Eigen::VectorXd euclidean_project(const ConstraintSet& set, const Eigen::VectorXd& y, const Eigen::VectorXd& w) {
  struct Visitor {
    const Eigen::VectorXd& y;
    const Eigen::VectorXd& w;
    Eigen::VectorXd operator()(const Unconstrained&) const { return y; }
    Eigen::VectorXd operator()(const Halfspace& s) const {
      const double excess = s.a.dot(y) - s.b;
      if (excess <= 0.0) {
        return y;
      }
      const Eigen::VectorXd dir = s.a.cwiseQuotient(w);
      return y - (excess / s.a.dot(dir)) * dir;
    }
    Eigen::VectorXd operator()(const Box& s) const { return y.cwiseMax(s.lo).cwiseMin(s.hi); }
    Eigen::VectorXd operator()(const AffineEquality& s) const {
      const Eigen::MatrixXd winv_at = w.cwiseInverse().asDiagonal() * s.A.transpose();
      const Eigen::MatrixXd gram = s.A * winv_at;
      const Eigen::VectorXd nu = gram.completeOrthogonalDecomposition().solve(s.A * y - s.c);
      return y - winv_at * nu;
    }
    Eigen::VectorXd operator()(const SimplexSubset& s) const { return euclidean_capped_simplex(y, s.lo, s.hi, w); }
    Eigen::VectorXd operator()(const Intersection&) const {
      throw InvalidInput("euclidean_project: intersections must be flattened first");
    }
  };
  return std::visit(Visitor{y, w}, set.variant());
}

/// Result of a Euclidean Dykstra feasibility pass.
struct FeasibilityResult {
  Eigen::VectorXd point;
  double residual;
};

/// Starting point for feasibility passes: a box center, else the uniform simplex point, else zero.
inline Eigen::VectorXd feasibility_start(const std::vector<ConstraintSet>& members, std::size_t dim) {
  for (const auto& m : members) {
    if (const auto* b = std::get_if<Box>(&m.variant())) {
      Eigen::VectorXd center(b->lo.size());
      for (Eigen::Index i = 0; i < center.size(); ++i) {
        const bool lo_finite = std::isfinite(b->lo(i));
        const bool hi_finite = std::isfinite(b->hi(i));
        center(i) = lo_finite && hi_finite ? 0.5 * (b->lo(i) + b->hi(i)) : lo_finite ? b->lo(i) : hi_finite ? b->hi(i) : 0.0;
      }
      return center;
    }
  }
  for (const auto& m : members) {
    if (std::holds_alternative<SimplexSubset>(m.variant())) {
      return Eigen::VectorXd::Constant(static_cast<Eigen::Index>(dim), 1.0 / static_cast<double>(dim));
    }
  }
  return Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
}

/// Euclidean Dykstra over primitive members, started from feasibility_start.
inline FeasibilityResult euclidean_feasibility(const std::vector<ConstraintSet>& members, std::size_t dim,
                                               int max_sweeps = 20000, double tol = 1e-10) {
  const Eigen::VectorXd w = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(dim));
  Eigen::VectorXd x = feasibility_start(members, dim);
  std::vector<Eigen::VectorXd> corr(members.size(), Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim)));
  double residual = std::numeric_limits<double>::infinity();
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double change = 0.0;
    for (std::size_t i = 0; i < members.size(); ++i) {
      const Eigen::VectorXd y = x + corr[i];
      const Eigen::VectorXd next = euclidean_project(members[i], y, w);
      corr[i] = y - next;
      change = std::max(change, (next - x).lpNorm<Eigen::Infinity>());
      x = next;
    }
    residual = 0.0;
    for (const auto& m : members) {
      residual = std::max(residual, violation(m, x));
    }
    if (residual <= tol && change <= tol) {
      break;
    }
  }
  return {x, residual};
}

}  // namespace detail

inline ConstraintSet ConstraintSet::intersection(std::vector<ConstraintSet> members) {
  std::vector<ConstraintSet> flat;
  for (auto& m : members) {
    for (auto& p : m.flatten()) {
      flat.push_back(std::move(p));
    }
  }
  if (flat.empty()) {
    throw InvalidInput("intersection: needs at least one member");
  }
  const std::size_t dim = flat.front().dim();
  for (const auto& m : flat) {
    if (m.dim() != dim) {
      throw InvalidInput("intersection: members have different dimensions");
    }
  }
  const auto feas = detail::euclidean_feasibility(flat, dim);
  if (!(feas.residual <= 1e-7)) {
    throw AssumptionViolation("intersection: constraint sets have empty intersection (feasibility residual " +
                              std::to_string(feas.residual) + "); the interaction term is undefined");
  }
  return ConstraintSet{Intersection{std::move(flat)}};
}

}  // namespace bregdecomp

#endif  // BREGDECOMP_CONSTRAINT_SET_HPP
