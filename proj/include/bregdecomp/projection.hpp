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

#ifndef BREGDECOMP_PROJECTION_HPP
#define BREGDECOMP_PROJECTION_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include <bregdecomp/constraint_set.hpp>
#include <bregdecomp/errors.hpp>
#include <bregdecomp/potential.hpp>

/**
 * \file
 * \brief Bregman projections onto constraint sets and their intersections.
 *
 * The projection of x onto C is the minimizer of D_Φ(q‖x) over q ∈ C. It is characterized by
 * the variational inequality ⟨∇Φ(q*) − ∇Φ(x), q − q*⟩ ≥ 0 for all q ∈ C, which yields the
 * three-point bound D_Φ(q‖x) ≥ D_Φ(q‖q*) + D_Φ(q*‖x).
 */

namespace bregdecomp {

struct ProjectionResult {
  Point point;
  /// Dykstra sweeps performed (0 for closed forms and single-set projections).
  int iterations = 0;
  /// Largest constraint violation of the returned point.
  double residual = 0.0;
  std::vector<std::string> warnings;
};

namespace detail {

inline void require_projectable(const Potential& phi, const char* where) {
  if (phi.kind() == Potential::Kind::kGaussianNatural) {
    throw InvalidInput(std::string(where) +
                       ": set projections are available for squared_euclidean and negative_entropy only");
  }
}

inline void require_set_dim(const Potential& phi, const ConstraintSet& set, const char* where) {
  if (set.dim() != phi.dim()) {
    throw InvalidInput(std::string(where) + ": set dimension does not match the potential");
  }
}

/**
 * Pulls simplex coordinates up to `margin` and takes the excess mass from the largest
 * coordinate, so the clamped entries stay exactly at the margin. Records a warning if it had to.
 */
inline Eigen::VectorXd clamp_to_interior(Eigen::VectorXd q, double margin, std::vector<std::string>& warnings) {
  margin = std::max(margin, kSimplexBoundaryMargin);
  if (q.minCoeff() >= margin) {
    return q;
  }
  q = q.cwiseMax(margin);
  Eigen::Index top = 0;
  q.maxCoeff(&top);
  q(top) -= q.sum() - 1.0;
  warnings.emplace_back("simplex coordinate clamped to interior margin " + std::to_string(margin));
  return q;
}

inline Eigen::VectorXd softmax(const Eigen::VectorXd& theta) {
  const double shift = theta.maxCoeff();
  Eigen::VectorXd z = (theta.array() - shift).exp().matrix();
  return z / z.sum();
}

/// Entropic projection onto {Σq = 1, lo ≤ q ≤ hi}: q = clamp(y e^{−τ}, lo, hi).
inline Eigen::VectorXd entropic_capped_simplex(const Eigen::VectorXd& y, const Eigen::VectorXd& lo_in,
                                               const Eigen::VectorXd& hi_in) {
  const Eigen::VectorXd lo = lo_in.cwiseMax(0.0);
  const Eigen::VectorXd hi = hi_in.cwiseMin(1.0);
  if (lo.sum() > 1.0 + 1e-12 || hi.sum() < 1.0 - 1e-12) {
    throw AssumptionViolation("entropic projection: bounds exclude every point of the simplex");
  }
  const Eigen::ArrayXd logy = y.array().log();
  auto at = [&](double tau) { return (logy - tau).exp().max(lo.array()).min(hi.array()).matrix().eval(); };
  const double tau = solve_decreasing([&](double t) { return at(t).sum(); }, 1.0);
  Eigen::VectorXd q = at(tau);
  return q / q.sum();
}

/// Entropic projection onto the halfspace ⟨a, q⟩ ≤ b within the simplex, by bisection on the multiplier.
inline Eigen::VectorXd entropic_halfspace(const Eigen::VectorXd& y, const Halfspace& s) {
  if (s.a.dot(y) <= s.b) {
    return y;
  }
  if (s.b < s.a.minCoeff()) {
    throw AssumptionViolation("entropic projection: halfspace misses the simplex");
  }
  const Eigen::VectorXd theta = y.array().log().matrix();
  auto h = [&](double nu) { return s.a.dot(softmax(theta - nu * s.a)) - s.b; };
  double lo = 0.0;
  double hi = 1.0;
  int expansions = 0;
  while (h(hi) > 0.0) {
    lo = hi;
    hi *= 2.0;
    if (++expansions > 1100) {
      throw ConvergenceError("entropic projection: multiplier bracket did not close", y, h(hi));
    }
  }
  for (int i = 0; i < 300; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) {
      break;
    }
    (h(mid) > 0.0 ? lo : hi) = mid;
  }
  return softmax(theta - hi * s.a);
}

/// Entropic projection onto {A q = c} within the simplex by damped Newton on the multipliers.
/**
 * KL projection onto {q on the simplex : A q = c} by Newton ascent on the concave dual
 * ψ(ν) = −⟨ν, c⟩ − log Σ y_i exp(−(Aᵀν)_i), whose gradient is A q(ν) − c. Steps are
 * backtracked until ψ increases sufficiently (Armijo).
 */
inline Eigen::VectorXd entropic_affine(const Eigen::VectorXd& y, const AffineEquality& s, double tol) {
  const Eigen::VectorXd theta = y.array().log().matrix();
  auto dual = [&](const Eigen::VectorXd& nu, Eigen::VectorXd& q) {
    const Eigen::VectorXd z = theta - s.A.transpose() * nu;
    const double zmax = z.maxCoeff();
    const double lse = zmax + std::log((z.array() - zmax).exp().sum());
    q = (z.array() - lse).exp().matrix();
    return -nu.dot(s.c) - lse;
  };
  Eigen::VectorXd nu = Eigen::VectorXd::Zero(s.A.rows());
  Eigen::VectorXd q;
  double psi = dual(nu, q);
  Eigen::VectorXd F = s.A * q - s.c;
  double norm = F.lpNorm<Eigen::Infinity>();
  const double target = 1e-14 * std::max(1.0, s.c.lpNorm<Eigen::Infinity>());
  for (int it = 0; it < 500 && norm > target; ++it) {
    const Eigen::MatrixXd cov = Eigen::MatrixXd(q.asDiagonal()) - q * q.transpose();
    const Eigen::MatrixXd J = s.A * cov * s.A.transpose();
    Eigen::VectorXd step = J.completeOrthogonalDecomposition().solve(F);
    if (!step.allFinite() || !(step.dot(F) > 0.0)) {
      step = F;  // gradient ascent when the Newton direction is unusable
    }
    const double slope = step.dot(F);
    double scale = 1.0;
    bool improved = false;
    for (int k = 0; k < 80; ++k) {
      const Eigen::VectorXd nu_try = nu + scale * step;
      Eigen::VectorXd q_try;
      const double psi_try = dual(nu_try, q_try);
      // Near the optimum ψ changes by less than its rounding error; the residual decides there.
      const bool flat = std::abs(psi_try - psi) <= 1e-13 * std::max(1.0, std::abs(psi)) &&
                        (s.A * q_try - s.c).lpNorm<Eigen::Infinity>() < norm;
      if (std::isfinite(psi_try) && (psi_try >= psi + 1e-4 * scale * slope || flat)) {
        nu = nu_try;
        q = q_try;
        psi = psi_try;
        improved = true;
        break;
      }
      scale *= 0.5;
    }
    F = s.A * q - s.c;
    norm = F.lpNorm<Eigen::Infinity>();
    if (!improved) {
      break;
    }
  }
  if (norm > tol) {
    throw ConvergenceError("entropic projection onto affine set did not converge", q, norm);
  }
  return q;
}

/// Bregman projection of y onto a primitive (non-intersection) set.
inline Eigen::VectorXd project_primitive(const Potential& phi, const ConstraintSet& set, const Eigen::VectorXd& y,
                                         const ProjectionOptions& opts, std::vector<std::string>& warnings) {
  if (violation(set, y) == 0.0) {
    return y;
  }
  if (phi.kind() == Potential::Kind::kSquaredEuclidean) {
    return euclidean_project(set, y, phi.weights());
  }
  struct Visitor {
    const Eigen::VectorXd& y;
    double tol;
    Eigen::VectorXd operator()(const Unconstrained&) const { return y; }
    Eigen::VectorXd operator()(const Halfspace& s) const { return entropic_halfspace(y, s); }
    Eigen::VectorXd operator()(const Box& s) const { return entropic_capped_simplex(y, s.lo, s.hi); }
    Eigen::VectorXd operator()(const AffineEquality& s) const { return entropic_affine(y, s, tol); }
    Eigen::VectorXd operator()(const SimplexSubset& s) const { return entropic_capped_simplex(y, s.lo, s.hi); }
    Eigen::VectorXd operator()(const Intersection&) const {
      throw InvalidInput("project_primitive: intersections must be flattened first");
    }
  };
  Eigen::VectorXd q = std::visit(Visitor{y, opts.tolerance}, set.variant());
  return clamp_to_interior(std::move(q), opts.interior_margin, warnings);
}

/// Verifies that the members meet inside the potential's domain.
inline void require_nonempty(const Potential& phi, std::vector<ConstraintSet> members) {
  if (phi.kind() == Potential::Kind::kNegativeEntropy) {
    members.push_back(ConstraintSet::simplex_subset(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(phi.dim())),
                                                    Eigen::VectorXd::Ones(static_cast<Eigen::Index>(phi.dim()))));
  }
  const auto feas = euclidean_feasibility(members, phi.dim());
  if (!(feas.residual <= 1e-7)) {
    throw AssumptionViolation("constraint sets have empty intersection in the potential's domain; "
                              "the interaction term is undefined");
  }
}

}  // namespace detail

ProjectionResult project_intersection_detailed(const Potential& phi, const std::vector<ConstraintSet>& sets,
                                               const Point& x, const ProjectionOptions& opts = {});

/// Bregman projection onto a single set. Intersections are forwarded to the Dykstra solver.
inline ProjectionResult project_detailed(const Potential& phi, const ConstraintSet& set, const Point& x,
                                         const ProjectionOptions& opts = {}) {
  detail::require_projectable(phi, "project");
  detail::require_set_dim(phi, set, "project");
  phi.require_domain(x.coords, "project");
  opts.validate();
  if (set.is_intersection()) {
    return project_intersection_detailed(phi, set.flatten(), x, opts);
  }
  ProjectionResult out;
  out.point = Point{detail::project_primitive(phi, set, x.coords, opts, out.warnings)};
  out.residual = violation(set, out.point.coords);
  return out;
}

inline Point project(const Potential& phi, const ConstraintSet& set, const Point& x,
                     const ProjectionOptions& opts = {}) {
  return project_detailed(phi, set, x, opts).point;
}

/**
 * Bregman projection onto ∩ sets by cyclic Bregman–Dykstra iteration: each set keeps a dual
 * correction that is added back in the mirror space before the next projection onto it.
 * Converges to the minimizer of D_Φ(·‖x) over the intersection.
 */
inline ProjectionResult project_intersection_detailed(const Potential& phi, const std::vector<ConstraintSet>& sets,
                                                      const Point& x, const ProjectionOptions& opts) {
  detail::require_projectable(phi, "project_intersection");
  phi.require_domain(x.coords, "project_intersection");
  opts.validate();

  std::vector<ConstraintSet> members;
  for (const auto& s : sets) {
    detail::require_set_dim(phi, s, "project_intersection");
    for (auto& m : s.flatten()) {
      if (!std::holds_alternative<Unconstrained>(m.variant())) {
        members.push_back(std::move(m));
      }
    }
  }
  if (members.empty()) {
    return ProjectionResult{x, 0, 0.0, {}};
  }
  if (members.size() == 1) {
    return project_detailed(phi, members.front(), x, opts);
  }
  detail::require_nonempty(phi, members);

  ProjectionResult out;
  Eigen::VectorXd cur = x.coords;
  const auto n = static_cast<Eigen::Index>(phi.dim());
  std::vector<Eigen::VectorXd> corr(members.size(), Eigen::VectorXd::Zero(n));
  std::vector<bool> corr_zero(members.size(), true);
  double residual = std::numeric_limits<double>::infinity();
  for (int sweep = 1; sweep <= opts.max_iterations; ++sweep) {
    double change = 0.0;
    for (std::size_t i = 0; i < members.size(); ++i) {
      const Eigen::VectorXd theta = phi.gradient_unchecked(cur) + corr[i];
      const Eigen::VectorXd y = corr_zero[i] ? cur : phi.mirror_inverse(theta);
      const Eigen::VectorXd next = detail::project_primitive(phi, members[i], y, opts, out.warnings);
      corr[i] = theta - phi.gradient_unchecked(next);
      if (phi.kind() == Potential::Kind::kNegativeEntropy) {
        corr[i].array() -= corr[i].mean();
      }
      corr_zero[i] = false;
      change = std::max(change, (next - cur).lpNorm<Eigen::Infinity>());
      cur = next;
    }
    residual = 0.0;
    for (const auto& m : members) {
      residual = std::max(residual, violation(m, cur));
    }
    out.iterations = sweep;
    if (change <= opts.tolerance && residual <= opts.tolerance) {
      std::sort(out.warnings.begin(), out.warnings.end());
      out.warnings.erase(std::unique(out.warnings.begin(), out.warnings.end()), out.warnings.end());
      out.point = Point{cur};
      out.residual = residual;
      return out;
    }
  }
  throw ConvergenceError("project_intersection: Bregman-Dykstra did not converge in " +
                             std::to_string(opts.max_iterations) + " sweeps",
                         cur, residual);
}

inline Point project_intersection(const Potential& phi, const std::vector<ConstraintSet>& sets, const Point& x,
                                  const ProjectionOptions& opts = {}) {
  return project_intersection_detailed(phi, sets, x, opts).point;
}

/**
 * Slack of the three-point bound at a feasible q:
 * D(q‖p) − D(q‖Π(p)) − D(Π(p)‖p), nonnegative for an exact projection.
 */
inline double pythagorean_gap(const Potential& phi, const Point& p, const ConstraintSet& set, const Point& q,
                              const ProjectionOptions& opts = {}) {
  phi.require_domain(q.coords, "pythagorean_gap");
  if (!contains(set, q, 1e-8)) {
    throw InvalidInput("pythagorean_gap: q is not in the set");
  }
  const Point proj = project(phi, set, p, opts);
  return divergence(phi, q, p) - divergence(phi, q, proj) - divergence(phi, proj, p);
}

struct GConvexityReport {
  /// Share of sampled geodesic points that lie in the set (tolerance 1e-9).
  double fraction_feasible = 0.0;
  double worst_violation = 0.0;
  std::size_t points_checked = 0;
};

namespace detail {

/// Draws a point of the set: a reference draw kept if feasible, else replaced by its projection.
inline Eigen::VectorXd sample_in_set(const Potential& phi, const ConstraintSet& set, const Eigen::VectorXd& anchor,
                                     std::mt19937_64& rng, const ProjectionOptions& opts) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::gamma_distribution<double> gamma(1.0, 1.0);
  auto draw = [&] {
    Eigen::VectorXd z(static_cast<Eigen::Index>(phi.dim()));
    if (phi.kind() == Potential::Kind::kNegativeEntropy) {
      for (auto& v : z) {
        v = std::max(gamma(rng), 1e-300);
      }
      z /= z.sum();
      return z;
    }
    for (auto& v : z) {
      v = normal(rng);
    }
    return Eigen::VectorXd(anchor + z);
  };
  constexpr int kRejections = 200;
  constexpr int kProjections = 100;
  for (int i = 0; i < kRejections; ++i) {
    Eigen::VectorXd z = draw();
    if (phi.domain_error(z).empty() && violation(set, z) <= 1e-12) {
      return z;
    }
  }
  for (int i = 0; i < kProjections; ++i) {
    Eigen::VectorXd z = draw();
    if (!phi.domain_error(z).empty()) {
      continue;
    }
    try {
      return project(phi, set, Point{z}, opts).coords;
    } catch (const ConvergenceError&) {
    }
  }
  throw AssumptionViolation("gconvexity_check: could not sample feasible points");
}

}  // namespace detail

/// Samples feasible pairs and reports how often their mirror geodesics stay in the set.
inline GConvexityReport gconvexity_check(const Potential& phi, const ConstraintSet& set, int n_pairs, int n_t,
                                         std::uint64_t rng_seed, const ProjectionOptions& opts = {}) {
  detail::require_projectable(phi, "gconvexity_check");
  detail::require_set_dim(phi, set, "gconvexity_check");
  if (n_pairs < 1 || n_t < 1) {
    throw InvalidInput("gconvexity_check: n_pairs and n_t must be >= 1");
  }
  detail::require_nonempty(phi, set.flatten());
  const Eigen::VectorXd anchor = detail::euclidean_feasibility(set.flatten(), phi.dim()).point;
  std::mt19937_64 rng(rng_seed);
  GConvexityReport report;
  std::size_t inside = 0;
  for (int pair = 0; pair < n_pairs; ++pair) {
    const Point x{detail::sample_in_set(phi, set, anchor, rng, opts)};
    const Point y{detail::sample_in_set(phi, set, anchor, rng, opts)};
    for (int k = 0; k < n_t; ++k) {
      const double t = n_t == 1 ? 0.5 : static_cast<double>(k) / static_cast<double>(n_t - 1);
      const double v = violation(set, geodesic(phi, x, y, t).coords);
      report.worst_violation = std::max(report.worst_violation, v);
      inside += v <= 1e-9 ? 1 : 0;
      ++report.points_checked;
    }
  }
  report.fraction_feasible = static_cast<double>(inside) / static_cast<double>(report.points_checked);
  return report;
}

namespace detail {

/// Outward normals of the constraints of `set` active at x.
inline void active_normals(const ConstraintSet& set, const Eigen::VectorXd& x, double tol,
                           std::vector<Eigen::VectorXd>& out) {
  const auto n = x.size();
  auto unit = [n](Eigen::Index i, double sign) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    e(i) = sign;
    return e;
  };
  struct Visitor {
    const Eigen::VectorXd& x;
    double tol;
    std::vector<Eigen::VectorXd>& out;
    decltype(unit)& make_unit;
    void operator()(const Unconstrained&) const {}
    void operator()(const Halfspace& s) const {
      if (std::abs(s.a.dot(x) - s.b) <= tol) {
        out.push_back(s.a);
      }
    }
    void bounds(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) const {
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (std::abs(x(i) - lo(i)) <= tol) {
          out.push_back(make_unit(i, -1.0));
        }
        if (std::abs(x(i) - hi(i)) <= tol) {
          out.push_back(make_unit(i, 1.0));
        }
      }
    }
    void operator()(const Box& s) const { bounds(s.lo, s.hi); }
    void operator()(const SimplexSubset& s) const { bounds(s.lo, s.hi); }
    void operator()(const AffineEquality& s) const {
      for (Eigen::Index r = 0; r < s.A.rows(); ++r) {
        out.push_back(s.A.row(r).transpose());
      }
    }
    void operator()(const Intersection& s) const {
      for (const auto& m : s.members) {
        std::visit(*this, m.variant());
      }
    }
  };
  std::visit(Visitor{x, tol, out, unit}, set.variant());
}

}  // namespace detail

/**
 * Largest |cosine| between active normals of `set_a` and `set_b` at x, measured with the
 * inverse Hessian of Φ (the metric on normals dual to G = ∇²Φ). Under negative entropy the
 * normals are first reduced to the simplex tangent space. 0 means orthogonal, 1 parallel.
 */
inline double normal_alignment(const Potential& phi, const ConstraintSet& set_a, const ConstraintSet& set_b,
                               const Point& x, double tol = 1e-8) {
  detail::require_projectable(phi, "normal_alignment");
  detail::require_set_dim(phi, set_a, "normal_alignment");
  detail::require_set_dim(phi, set_b, "normal_alignment");
  phi.require_domain(x.coords, "normal_alignment");

  auto inner = [&](const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
    if (phi.kind() == Potential::Kind::kNegativeEntropy) {
      const double ubar = x.coords.dot(u);
      const double vbar = x.coords.dot(v);
      return (x.coords.array() * (u.array() - ubar) * (v.array() - vbar)).sum();
    }
    return (u.array() * v.array() / phi.weights().array()).sum();
  };
  auto collect = [&](const ConstraintSet& s) {
    std::vector<Eigen::VectorXd> raw;
    detail::active_normals(s, x.coords, tol, raw);
    std::vector<Eigen::VectorXd> kept;
    for (auto& v : raw) {
      if (inner(v, v) > 1e-300) {
        kept.push_back(std::move(v));
      }
    }
    return kept;
  };
  const auto na = collect(set_a);
  const auto nb = collect(set_b);
  if (na.empty() || nb.empty()) {
    throw UndefinedDiagnostic("normal_alignment: no active constraint on one of the sets at this point");
  }
  double best = 0.0;
  for (const auto& u : na) {
    for (const auto& v : nb) {
      const double c = std::abs(inner(u, v)) / std::sqrt(inner(u, u) * inner(v, v));
      best = std::max(best, std::min(1.0, c));
    }
  }
  return best;
}

}  // namespace bregdecomp

#endif  // BREGDECOMP_PROJECTION_HPP
