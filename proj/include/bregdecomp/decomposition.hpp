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

#ifndef BREGDECOMP_DECOMPOSITION_HPP
#define BREGDECOMP_DECOMPOSITION_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include <bregdecomp/constraint_set.hpp>
#include <bregdecomp/errors.hpp>
#include <bregdecomp/potential.hpp>
#include <bregdecomp/projection.hpp>

/**
 * \file
 * \brief Latency / order / interaction decomposition of the divergence to the ideal predictor.
 *
 * With a = Π_ε(p*), b = Π_λ(a) and q ranging over C_ε ∩ C_λ, two applications of the
 * three-point bound give
 *
 *     D(q‖p*) ≥ D(a‖p*) + D(b‖a) + D(q‖b),
 *
 * i.e. order penalty g2 = D(a‖p*), latency penalty g1 = D(b‖a) and interaction
 * g12 = min_q D(q‖b), attained at the projection of b onto the intersection.
 */

namespace bregdecomp {

struct DecompositionReport {
  double g2 = 0.0;
  double g1 = 0.0;
  double g12 = 0.0;
  double total = 0.0;
  Point p_star;
  /// Projection of p* onto the order-feasible set.
  Point a;
  /// Projection of a onto the latency-feasible set.
  Point b;
  /// Projection of p* onto the intersection.
  Point joint;
  /// Projection of b onto the intersection (attains g12).
  Point b_joint;
  /// D(joint‖b): zero when sequential and joint projections coincide.
  double orthogonality_residual = 0.0;
  /// orthogonality_residual below 1e-8.
  bool orthogonal = false;
  /// Normal alignment of the two sets at b, when both have active constraints there.
  std::optional<double> normal_alignment;
  /// Computed on convex relaxations of the original sets.
  bool conservative = false;
  std::optional<bool> hull_is_exact;
  std::vector<std::string> warnings;
};

/// Components of the nonconvexity penalty Δ_ncx = δ_relax + ζ + δ_emp.
struct NcxPenalty {
  double delta_relax = 0.0;
  double zeta = 0.0;
  double delta_emp = 0.0;

  static NcxPenalty make(double delta_relax, double zeta, double delta_emp) {
    if (!(delta_relax >= 0.0) || !(zeta >= 0.0) || !(delta_emp >= 0.0)) {
      throw InvalidInput("NcxPenalty: components must be nonnegative");
    }
    return {delta_relax, zeta, delta_emp};
  }

  [[nodiscard]] double total() const noexcept { return delta_relax + zeta + delta_emp; }
};

namespace detail {

inline Point project_onto(const Potential& phi, const ConstraintSet& set, const Point& x,
                          const ProjectionOptions& opts, std::vector<std::string>& warnings) {
  auto r = project_detailed(phi, set, x, opts);
  warnings.insert(warnings.end(), r.warnings.begin(), r.warnings.end());
  return r.point;
}

inline double floor_zero(double v) { return v < 0.0 ? 0.0 : v; }

}  // namespace detail

inline DecompositionReport decompose(const Potential& phi, const ConstraintSet& set_eps,
                                     const ConstraintSet& set_lam, const Point& p_star,
                                     const ProjectionOptions& opts = {}) {
  detail::require_projectable(phi, "decompose");
  phi.require_domain(p_star.coords, "decompose");
  std::vector<ConstraintSet> both = set_eps.flatten();
  for (auto& m : set_lam.flatten()) {
    both.push_back(std::move(m));
  }
  detail::require_nonempty(phi, both);

  DecompositionReport r;
  r.p_star = p_star;
  r.a = detail::project_onto(phi, set_eps, p_star, opts, r.warnings);
  r.b = detail::project_onto(phi, set_lam, r.a, opts, r.warnings);
  {
    auto j = project_intersection_detailed(phi, both, p_star, opts);
    r.joint = j.point;
    r.warnings.insert(r.warnings.end(), j.warnings.begin(), j.warnings.end());
    auto bj = project_intersection_detailed(phi, both, r.b, opts);
    r.b_joint = bj.point;
    r.warnings.insert(r.warnings.end(), bj.warnings.begin(), bj.warnings.end());
  }
  r.g2 = detail::floor_zero(divergence(phi, r.a, p_star));
  r.g1 = detail::floor_zero(divergence(phi, r.b, r.a));
  r.g12 = detail::floor_zero(divergence(phi, r.b_joint, r.b));
  r.total = r.g1 + r.g2 + r.g12;
  r.orthogonality_residual = detail::floor_zero(divergence(phi, r.joint, r.b));
  r.orthogonal = r.orthogonality_residual <= 1e-8;
  try {
    r.normal_alignment = normal_alignment(phi, set_eps, set_lam, r.b, std::max(1e-8, 10.0 * opts.tolerance));
  } catch (const UndefinedDiagnostic&) {
  }
  std::sort(r.warnings.begin(), r.warnings.end());
  r.warnings.erase(std::unique(r.warnings.begin(), r.warnings.end()), r.warnings.end());
  return r;
}

struct MasterCheck {
  /// min over samples of D(q‖p*) − (g2 + g1 + D(q‖b)).
  double min_slack = std::numeric_limits<double>::infinity();
  /// Indices of samples whose slack is below −1e-7.
  std::vector<std::size_t> violations;
};

/// Evaluates the master inequality at every sample; each sample must be jointly feasible.
inline MasterCheck verify_master(const Potential& phi, const ConstraintSet& set_eps, const ConstraintSet& set_lam,
                                 const DecompositionReport& report, const std::vector<Point>& feasible_samples,
                                 double feasibility_tol = 1e-9) {
  MasterCheck out;
  for (std::size_t i = 0; i < feasible_samples.size(); ++i) {
    const Point& q = feasible_samples[i];
    if (!contains(set_eps, q, feasibility_tol) || !contains(set_lam, q, feasibility_tol)) {
      throw InvalidInput("verify_master: sample " + std::to_string(i) + " is not feasible for both sets");
    }
    const double slack =
        divergence(phi, q, report.p_star) - (report.g2 + report.g1 + divergence(phi, q, report.b));
    out.min_slack = std::min(out.min_slack, slack);
    if (slack < -1e-7) {
      out.violations.push_back(i);
    }
  }
  return out;
}

/**
 * Rejection-samples points of C_ε ∩ C_λ: uniformly from [lo, hi] under squared Euclidean,
 * uniformly on the simplex under negative entropy (the box is then ignored).
 */
inline std::vector<Point> sample_feasible(const Potential& phi, const ConstraintSet& set_eps,
                                          const ConstraintSet& set_lam, const Eigen::VectorXd& lo,
                                          const Eigen::VectorXd& hi, std::size_t n, std::uint64_t seed,
                                          std::size_t max_attempts_per_point = 100000) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::gamma_distribution<double> gamma(1.0, 1.0);
  std::vector<Point> out;
  out.reserve(n);
  const auto d = static_cast<Eigen::Index>(phi.dim());
  std::size_t attempts = 0;
  while (out.size() < n) {
    if (++attempts > max_attempts_per_point * std::max<std::size_t>(n, 1)) {
      throw AssumptionViolation("sample_feasible: rejection sampling found too few feasible points");
    }
    Eigen::VectorXd z(d);
    if (phi.kind() == Potential::Kind::kNegativeEntropy) {
      for (auto& v : z) {
        v = gamma(rng);
      }
      z /= z.sum();
    } else {
      for (Eigen::Index i = 0; i < d; ++i) {
        z(i) = lo(i) + (hi(i) - lo(i)) * unit(rng);
      }
    }
    if (!phi.domain_error(z).empty()) {
      continue;
    }
    if (violation(set_eps, z) <= 0.0 && violation(set_lam, z) <= 0.0) {
      out.emplace_back(z);
    }
  }
  return out;
}

/// decompose() on convex relaxations of the constraint sets; the report is flagged conservative.
inline DecompositionReport convexified_decompose(const Potential& phi, const ConstraintSet& hull_eps,
                                                 const ConstraintSet& hull_lam, const Point& p_star,
                                                 const ProjectionOptions& opts = {},
                                                 std::optional<bool> hull_is_exact = std::nullopt) {
  DecompositionReport r = decompose(phi, hull_eps, hull_lam, p_star, opts);
  r.conservative = true;
  r.hull_is_exact = hull_is_exact;
  return r;
}

struct BoxHull {
  ConstraintSet box;
  /// True when the bounding box equals the closed convex hull of the union.
  bool hull_is_exact;
};

/**
 * Bounding box of a union of boxes. The bounding box is the exact convex hull iff every one
 * of its vertices lies in some member box; that test is run for up to 20 dimensions and
 * reported as inexact beyond.
 */
inline BoxHull hull_of_box_union(const std::vector<Box>& boxes) {
  if (boxes.empty()) {
    throw InvalidInput("hull_of_box_union: empty list");
  }
  Eigen::VectorXd lo = boxes.front().lo;
  Eigen::VectorXd hi = boxes.front().hi;
  for (const auto& b : boxes) {
    if (b.lo.size() != lo.size() || b.hi.size() != lo.size()) {
      throw InvalidInput("hull_of_box_union: boxes have different dimensions");
    }
    lo = lo.cwiseMin(b.lo);
    hi = hi.cwiseMax(b.hi);
  }
  const auto d = lo.size();
  bool exact = d <= 20;
  if (exact) {
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << d) && exact; ++mask) {
      Eigen::VectorXd vertex(d);
      for (Eigen::Index i = 0; i < d; ++i) {
        vertex(i) = ((mask >> i) & 1U) != 0 ? hi(i) : lo(i);
      }
      exact = std::any_of(boxes.begin(), boxes.end(), [&](const Box& b) {
        return (vertex.array() >= b.lo.array()).all() && (vertex.array() <= b.hi.array()).all();
      });
    }
  }
  return {ConstraintSet::box(lo, hi), exact};
}

/**
 * Smallest D(q‖p*) over q in (∪ boxes) ∩ C_λ, by projecting onto each box ∩ C_λ in turn.
 * Boxes that miss C_λ are skipped. Throws AssumptionViolation when none meets it.
 */
inline double best_feasible_divergence_over_union(const Potential& phi, const std::vector<Box>& boxes,
                                                  const ConstraintSet& set_lam, const Point& p_star,
                                                  const ProjectionOptions& opts = {}) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& b : boxes) {
    std::vector<ConstraintSet> sets{ConstraintSet::box(b.lo, b.hi)};
    for (auto& m : set_lam.flatten()) {
      sets.push_back(std::move(m));
    }
    try {
      const Point q = project_intersection(phi, sets, p_star, opts);
      best = std::min(best, divergence(phi, q, p_star));
    } catch (const AssumptionViolation&) {
    }
  }
  if (!std::isfinite(best)) {
    throw AssumptionViolation("best_feasible_divergence_over_union: no box meets the latency set");
  }
  return best;
}

/// Upper bound on the curvature remainder: (ρ/α)(g2 + g1) + c·κ̂·(δλ·δε)².
inline double zeta_upper_bound(double rho, double alpha, double g2, double g1, double c_const, double kappa_hat,
                               double d_lam, double d_eps) {
  if (!(alpha > 0.0)) {
    throw InvalidInput("zeta_upper_bound: alpha must be positive");
  }
  if (!(rho >= 0.0) || !(c_const >= 0.0) || !(kappa_hat >= 0.0)) {
    throw InvalidInput("zeta_upper_bound: rho, c and kappa_hat must be nonnegative");
  }
  const double cross = d_lam * d_eps;
  return (rho / alpha) * (g2 + g1) + c_const * kappa_hat * cross * cross;
}

/// max{0, g1 + g2 + g12 − Δ_ncx}.
inline double lb_safe(double g1, double g2, double g12, double delta_ncx) {
  if (!(delta_ncx >= 0.0)) {
    throw InvalidInput("lb_safe: delta_ncx must be nonnegative");
  }
  return std::max(0.0, g1 + g2 + g12 - delta_ncx);
}

enum class Verdict { kInformative, kBorderline, kVacuous };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::kInformative:
      return "informative";
    case Verdict::kBorderline:
      return "borderline";
    case Verdict::kVacuous:
      return "vacuous";
  }
  return "unknown";
}

struct PenaltyRatio {
  double r;
  Verdict verdict;
};

/// r = Δ_ncx / (g1 + g2 + g12 + eps); informative for r ≤ 0.5, vacuous for r > 1.
inline PenaltyRatio penalty_ratio(double delta_ncx, double g1, double g2, double g12, double eps = 1e-9) {
  if (!(delta_ncx >= 0.0) || !(eps > 0.0)) {
    throw InvalidInput("penalty_ratio: need delta_ncx >= 0 and eps > 0");
  }
  const double r = delta_ncx / (g1 + g2 + g12 + eps);
  const Verdict v = r <= 0.5 ? Verdict::kInformative : (r <= 1.0 ? Verdict::kBorderline : Verdict::kVacuous);
  return {r, v};
}

}  // namespace bregdecomp

#endif  // BREGDECOMP_DECOMPOSITION_HPP
