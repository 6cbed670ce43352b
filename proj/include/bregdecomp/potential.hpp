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

#ifndef BREGDECOMP_POTENTIAL_HPP
#define BREGDECOMP_POTENTIAL_HPP

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include <bregdecomp/errors.hpp>

/**
 * \file
 * \brief Legendre potentials, mirror maps and Bregman divergences.
 *
 * Three potentials are provided:
 *  - squared Euclidean, optionally with a positive diagonal metric: Φ(x) = ½ Σ wᵢ xᵢ²;
 *  - negative entropy on the open probability simplex: Φ(x) = Σ xᵢ ln xᵢ;
 *  - the Gaussian log-loss potential, i.e. the negative differential entropy of N(m, v)
 *    written on the expectation parameters (m, m² + v). Points of this potential are stored
 *    as (m, v); dual points are the natural parameters (m / v, −1 / (2v)), and the divergence
 *    is KL(N(m₁, v₁) ‖ N(m₂, v₂)).
 */

namespace bregdecomp {

namespace detail {

template <class Tag>
struct StrongVector {
  Eigen::VectorXd coords;

  StrongVector() = default;
  explicit StrongVector(Eigen::VectorXd c) : coords(std::move(c)) {}
  StrongVector(std::initializer_list<double> values)
      : coords(Eigen::Map<const Eigen::VectorXd>(values.begin(), static_cast<Eigen::Index>(values.size()))) {}

  [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(coords.size()); }
  double operator[](std::size_t i) const { return coords(static_cast<Eigen::Index>(i)); }
};

struct PrimalTag {};
struct DualTag {};

}  // namespace detail

/// A point of a potential's domain, in native prediction-space coordinates.
using Point = detail::StrongVector<detail::PrimalTag>;

/// A point of the dual (mirror) space. Same representation as Point, different meaning.
using DualPoint = detail::StrongVector<detail::DualTag>;

/// Coordinates closer than this to the simplex boundary are rejected.
inline constexpr double kSimplexBoundaryMargin = 1e-12;
/// Allowed deviation of a simplex point's coordinate sum from one.
inline constexpr double kSimplexSumTolerance = 1e-12;

class Potential {
 public:
  enum class Kind { kSquaredEuclidean, kNegativeEntropy, kGaussianNatural };

  /// Squared Euclidean potential. An empty `weights` means the identity metric.
  static Potential squared_euclidean(std::size_t dim, Eigen::VectorXd weights = {}) {
    if (dim == 0) {
      throw InvalidInput("squared_euclidean: dimension must be positive");
    }
    if (weights.size() == 0) {
      weights = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(dim));
    }
    if (static_cast<std::size_t>(weights.size()) != dim) {
      throw InvalidInput("squared_euclidean: metric weights must match the dimension");
    }
    for (const double w : weights) {
      if (!(w > 0.0) || !std::isfinite(w)) {
        throw InvalidInput("squared_euclidean: metric weights must be finite and strictly positive");
      }
    }
    return Potential{Kind::kSquaredEuclidean, dim, std::move(weights)};
  }

  static Potential negative_entropy(std::size_t dim) {
    if (dim < 2) {
      throw InvalidInput("negative_entropy: the simplex needs dimension >= 2");
    }
    return Potential{Kind::kNegativeEntropy, dim, {}};
  }

  static Potential gaussian_natural() { return Potential{Kind::kGaussianNatural, 2, {}}; }

  [[nodiscard]] Kind kind() const noexcept { return kind_; }
  [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
  [[nodiscard]] const Eigen::VectorXd& weights() const noexcept { return weights_; }

  [[nodiscard]] std::string name() const {
    switch (kind_) {
      case Kind::kSquaredEuclidean:
        return "squared_euclidean";
      case Kind::kNegativeEntropy:
        return "negative_entropy";
      case Kind::kGaussianNatural:
        return "gaussian_natural";
    }
    return "unknown";
  }

  /// Returns an empty string when `x` is in the open domain, otherwise the reason it is not.
  [[nodiscard]] std::string domain_error(const Eigen::VectorXd& x) const {
    if (static_cast<std::size_t>(x.size()) != dim_) {
      return "dimension mismatch: expected " + std::to_string(dim_) + ", got " + std::to_string(x.size());
    }
    if (!x.allFinite()) {
      return "non-finite coordinate";
    }
    switch (kind_) {
      case Kind::kSquaredEuclidean:
        return {};
      case Kind::kNegativeEntropy:
        if (x.minCoeff() < kSimplexBoundaryMargin) {
          return "point is on or outside the simplex boundary";
        }
        if (std::abs(x.sum() - 1.0) > kSimplexSumTolerance) {
          return "coordinates do not sum to one";
        }
        return {};
      case Kind::kGaussianNatural:
        if (!(x(1) > 0.0)) {
          return "variance must be positive";
        }
        return {};
    }
    return "unknown potential";
  }

  void require_domain(const Eigen::VectorXd& x, const char* where) const {
    if (auto err = domain_error(x); !err.empty()) {
      throw InvalidInput(std::string(where) + ": " + name() + " domain violation: " + err);
    }
  }

  /// Unchecked Φ(x).
  [[nodiscard]] double value_unchecked(const Eigen::VectorXd& x) const {
    switch (kind_) {
      case Kind::kSquaredEuclidean:
        return 0.5 * (weights_.array() * x.array().square()).sum();
      case Kind::kNegativeEntropy:
        return (x.array() * x.array().log()).sum();
      case Kind::kGaussianNatural:
        return -0.5 * std::log(x(1)) - 0.5 * (1.0 + std::log(2.0 * std::numbers::pi));
    }
    return 0.0;
  }

  /// Unchecked ∇Φ(x).
  [[nodiscard]] Eigen::VectorXd gradient_unchecked(const Eigen::VectorXd& x) const {
    switch (kind_) {
      case Kind::kSquaredEuclidean:
        return weights_.cwiseProduct(x);
      case Kind::kNegativeEntropy:
        return (x.array().log() + 1.0).matrix();
      case Kind::kGaussianNatural: {
        Eigen::VectorXd theta(2);
        theta << x(0) / x(1), -0.5 / x(1);
        return theta;
      }
    }
    return x;
  }

  /**
   * Mirror-map inverse used by the solvers. For negative entropy the dual space is taken
   * modulo the simplex normal (constant shifts), so the result is renormalized onto the
   * simplex. Throws InvalidInput outside the dual domain.
   */
  [[nodiscard]] Eigen::VectorXd mirror_inverse(const Eigen::VectorXd& theta) const {
    switch (kind_) {
      case Kind::kSquaredEuclidean:
        return theta.cwiseQuotient(weights_);
      case Kind::kNegativeEntropy: {
        const double shift = theta.maxCoeff();
        Eigen::VectorXd z = (theta.array() - shift).exp().matrix();
        return z / z.sum();
      }
      case Kind::kGaussianNatural: {
        if (!(theta(1) < 0.0)) {
          throw InvalidInput("gaussian_natural: second natural parameter must be negative");
        }
        const double v = -0.5 / theta(1);
        Eigen::VectorXd x(2);
        x << theta(0) * v, v;
        return x;
      }
    }
    return theta;
  }

  /// Hessian of Φ at x, in the point coordinates of the potential's affine chart.
  [[nodiscard]] Eigen::MatrixXd hessian(const Eigen::VectorXd& x) const {
    switch (kind_) {
      case Kind::kSquaredEuclidean:
        return weights_.asDiagonal();
      case Kind::kNegativeEntropy:
        return x.cwiseInverse().asDiagonal();
      case Kind::kGaussianNatural: {
        // Φ(η) = −½ ln(η₂ − η₁²) + const, with η = (m, m² + v).
        const double m = x(0);
        const double v = x(1);
        Eigen::MatrixXd h(2, 2);
        h(0, 0) = 1.0 / v + 2.0 * m * m / (v * v);
        h(0, 1) = h(1, 0) = -m / (v * v);
        h(1, 1) = 0.5 / (v * v);
        return h;
      }
    }
    return {};
  }

 private:
  Potential(Kind kind, std::size_t dim, Eigen::VectorXd weights)
      : kind_(kind), dim_(dim), weights_(std::move(weights)) {}

  Kind kind_;
  std::size_t dim_;
  Eigen::VectorXd weights_;
};

/// Maps a Gaussian point (m, v) to its expectation parameters (m, m² + v).
inline Eigen::VectorXd gaussian_moments(const Point& x) {
  Eigen::VectorXd eta(2);
  eta << x[0], x[0] * x[0] + x[1];
  return eta;
}

/// Inverse of gaussian_moments.
inline Point gaussian_from_moments(const Eigen::VectorXd& eta) {
  Eigen::VectorXd x(2);
  x << eta(0), eta(1) - eta(0) * eta(0);
  return Point{x};
}

inline double potential_value(const Potential& phi, const Point& x) {
  phi.require_domain(x.coords, "potential_value");
  return phi.value_unchecked(x.coords);
}

/// ∇Φ(x). For GaussianNatural the derivative is taken with respect to the expectation parameters.
inline DualPoint gradient(const Potential& phi, const Point& x) {
  phi.require_domain(x.coords, "gradient");
  return DualPoint{phi.gradient_unchecked(x.coords)};
}

/**
 * ∇Φ*(d), the inverse mirror map. Rejects duals outside the range of ∇Φ; for negative
 * entropy this includes duals whose exponentials do not describe a point of the simplex.
 */
inline Point gradient_inverse(const Potential& phi, const DualPoint& d) {
  if (d.size() != phi.dim() || !d.coords.allFinite()) {
    throw InvalidInput("gradient_inverse: dual point has wrong dimension or non-finite entries");
  }
  if (phi.kind() == Potential::Kind::kNegativeEntropy) {
    Eigen::VectorXd x = (d.coords.array() - 1.0).exp().matrix();
    if (std::abs(x.sum() - 1.0) > 1e-10) {
      throw InvalidInput("gradient_inverse: dual point is not in the range of the simplex mirror map");
    }
    return Point{x};
  }
  Eigen::VectorXd x = phi.mirror_inverse(d.coords);
  phi.require_domain(x, "gradient_inverse");
  return Point{x};
}

/// KL(N(mu, sigma2) ‖ N(m, v)): the log-loss regret of forecasting N(m, v) against N(mu, sigma2).
inline double gaussian_kl(double m, double v, double mu, double sigma2) {
  if (!(v > 0.0) || !(sigma2 > 0.0)) {
    throw InvalidInput("gaussian_kl: variances must be positive");
  }
  const double ratio = sigma2 / v;
  return (m - mu) * (m - mu) / (2.0 * v) + 0.5 * (ratio - 1.0 - std::log(ratio));
}

namespace detail {

/// Unchecked D_Φ(p‖q) in closed form.
inline double divergence_unchecked(const Potential& phi, const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
  switch (phi.kind()) {
    case Potential::Kind::kSquaredEuclidean:
      return 0.5 * (phi.weights().array() * (p - q).array().square()).sum();
    case Potential::Kind::kNegativeEntropy:
      return (p.array() * (p.array() / q.array()).log()).sum() - p.sum() + q.sum();
    case Potential::Kind::kGaussianNatural:
      return gaussian_kl(q(0), q(1), p(0), p(1));
  }
  return 0.0;
}

}  // namespace detail

/// D_Φ(p‖q) = Φ(p) − Φ(q) − ⟨∇Φ(q), p − q⟩.
inline double divergence(const Potential& phi, const Point& p, const Point& q) {
  phi.require_domain(p.coords, "divergence");
  phi.require_domain(q.coords, "divergence");
  return detail::divergence_unchecked(phi, p.coords, q.coords);
}

/// Mirror geodesic Γ(x, y; t) = ∇Φ*((1 − t)∇Φ(x) + t∇Φ(y)).
inline Point geodesic(const Potential& phi, const Point& x, const Point& y, double t) {
  phi.require_domain(x.coords, "geodesic");
  phi.require_domain(y.coords, "geodesic");
  if (!(t >= 0.0 && t <= 1.0)) {
    throw InvalidInput("geodesic: t must lie in [0, 1]");
  }
  if (t == 0.0) {
    return x;
  }
  if (t == 1.0) {
    return y;
  }
  const Eigen::VectorXd theta = (1.0 - t) * phi.gradient_unchecked(x.coords) + t * phi.gradient_unchecked(y.coords);
  return Point{phi.mirror_inverse(theta)};
}

}  // namespace bregdecomp

#endif  // BREGDECOMP_POTENTIAL_HPP
