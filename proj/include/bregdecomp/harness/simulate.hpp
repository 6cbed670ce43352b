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

#ifndef BREGDECOMP_HARNESS_SIMULATE_HPP
#define BREGDECOMP_HARNESS_SIMULATE_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <bregdecomp/empirical.hpp>
#include <bregdecomp/errors.hpp>
#include <bregdecomp/potential.hpp>

namespace bregdecomp::harness {

/**
 * Gaussian 2×2 toggle experiment. The forecaster outputs N(m, σ²) against truth N(μ, σ²):
 *  - 00: m = μ;
 *  - 01: m = μ + eps_shift (order constraint displaces the mean);
 *  - 10: m = μ + η, η ~ N(0, lam_noise²) (lagged proxy);
 *  - 11: m = μ + eps_shift + η with η = lam_noise·(ρ + √(1 − ρ²)·z), z ~ N(0, 1), so the
 *    proxy error keeps second moment lam_noise² and has E[η·eps_shift] = ρ·lam_noise·eps_shift.
 * Expected losses: g1 = lam_noise²/(2σ²), g2 = eps_shift²/(2σ²), g12 = ρ·lam_noise·eps_shift/σ².
 */
struct DGPConfig {
  double mu = 0.0;
  double sigma2 = 1.0;
  double lam_noise = 0.0;
  double eps_shift = 0.0;
  double interaction_corr = 0.0;
  std::size_t n = 1000;
  std::size_t n_clusters = 20;

  void validate() const {
    if (!std::isfinite(mu) || !std::isfinite(lam_noise) || !std::isfinite(eps_shift)) {
      throw InvalidInput("dgp: parameters must be finite");
    }
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
      throw InvalidInput("dgp: sigma2 must be positive");
    }
    if (!(lam_noise >= 0.0)) {
      throw InvalidInput("dgp: lam_noise must be nonnegative");
    }
    if (!(interaction_corr >= -1.0 && interaction_corr <= 1.0)) {
      throw InvalidInput("dgp: interaction_corr must lie in [-1, 1]");
    }
    if (n < 1 || n_clusters < 1) {
      throw InvalidInput("dgp: n and n_clusters must be >= 1");
    }
  }

  [[nodiscard]] double true_g1() const { return lam_noise * lam_noise / (2.0 * sigma2); }
  [[nodiscard]] double true_g2() const { return eps_shift * eps_shift / (2.0 * sigma2); }
  [[nodiscard]] double true_g12() const { return interaction_corr * lam_noise * eps_shift / sigma2; }

  /// Population regime means L00, L01, L10, L11 of the simulated loss.
  [[nodiscard]] RegimeTable population_losses() const {
    const double g1 = true_g1();
    const double g2 = true_g2();
    return RegimeTable::from_losses(0.0, g2, g1, g1 + g2 + true_g12());
  }
};

/// Unit weights; cluster ids c0, c1, ... assigned round-robin within each regime.
inline std::vector<WeightedSample> simulate_2x2(const DGPConfig& dgp, std::uint64_t seed) {
  dgp.validate();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double rho = dgp.interaction_corr;
  const double ortho = std::sqrt(1.0 - rho * rho);
  std::vector<std::string> cluster_names;
  for (std::size_t c = 0; c < dgp.n_clusters; ++c) {
    cluster_names.push_back("c" + std::to_string(c));
  }
  std::vector<WeightedSample> out;
  out.reserve(4 * dgp.n);
  for (const Regime r : kAllRegimes) {
    for (std::size_t i = 0; i < dgp.n; ++i) {
      double m = dgp.mu;
      switch (r) {
        case Regime::k00:
          break;
        case Regime::k01:
          m += dgp.eps_shift;
          break;
        case Regime::k10:
          m += dgp.lam_noise * normal(rng);
          break;
        case Regime::k11:
          m += dgp.eps_shift + dgp.lam_noise * (rho + ortho * normal(rng));
          break;
      }
      WeightedSample s;
      s.y = gaussian_kl(m, dgp.sigma2, dgp.mu, dgp.sigma2);
      s.cluster_id = cluster_names[i % dgp.n_clusters];
      s.regime = r;
      out.push_back(std::move(s));
    }
  }
  return out;
}

}  // namespace bregdecomp::harness

#endif  // BREGDECOMP_HARNESS_SIMULATE_HPP
