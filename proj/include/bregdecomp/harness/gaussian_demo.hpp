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

#ifndef BREGDECOMP_HARNESS_GAUSSIAN_DEMO_HPP
#define BREGDECOMP_HARNESS_GAUSSIAN_DEMO_HPP

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <bregdecomp/errors.hpp>
#include <bregdecomp/harness/format.hpp>

namespace bregdecomp::harness {

/// Parameters of the Gaussian log-loss toy model.
struct ToyConfig {
  double sigma2 = 1.0;
  double rho_toy = 0.5;
  double lam_start = 0.0;
  double lam_stop = 2.0;
  int lam_points = 200;
  std::vector<double> eps_list{0.0, 0.5, 1.0};

  void validate() const {
    if (!(sigma2 > 0.0)) {
      throw InvalidInput("toy: sigma2 must be positive");
    }
    if (!(rho_toy >= 0.0 && rho_toy <= 1.0)) {
      throw InvalidInput("toy: rho_toy must lie in [0, 1]");
    }
    if (lam_points < 2 || !std::isfinite(lam_start) || !std::isfinite(lam_stop)) {
      throw InvalidInput("toy: lam grid needs at least 2 points and finite bounds");
    }
  }
};

/// Evenly spaced grid with the same arithmetic as numpy.linspace (endpoint included).
inline std::vector<double> linspace(double start, double stop, int num) {
  std::vector<double> out(static_cast<std::size_t>(num));
  const double step = (stop - start) / static_cast<double>(num - 1);
  for (int i = 0; i < num; ++i) {
    out[static_cast<std::size_t>(i)] = static_cast<double>(i) * step + start;
  }
  out.back() = stop;
  return out;
}

struct CurveTable {
  std::vector<double> lam;
  std::vector<double> g1;
  /// One (ε, total) series per nonzero ε of the config, in config order.
  std::vector<std::pair<double, std::vector<double>>> totals;

  [[nodiscard]] std::vector<std::string> column_names() const {
    std::vector<std::string> names{"lam", "g1"};
    for (const auto& [eps, col] : totals) {
      names.push_back("total_eps_" + format_decimal(eps));
    }
    return names;
  }
};

/**
 * Latency penalty g1(λ) = λ²/(2σ²) and totals g1 + g2(ε) + g12(λ, ε) with
 * g2(ε) = ε²/(2σ²) and g12 = ρλ²ε², evaluated in the same operation order as the
 * reference plotting script so σ² = 1 reproduces its curves bit for bit.
 */
inline CurveTable gaussian_curves(const ToyConfig& cfg) {
  cfg.validate();
  CurveTable t;
  t.lam = linspace(cfg.lam_start, cfg.lam_stop, cfg.lam_points);
  t.g1.reserve(t.lam.size());
  for (const double l : t.lam) {
    t.g1.push_back(0.5 * (l * l) / cfg.sigma2);
  }
  for (const double eps : cfg.eps_list) {
    if (eps == 0.0) {
      continue;
    }
    const double g2 = 0.5 * (eps * eps) / cfg.sigma2;
    std::vector<double> total;
    total.reserve(t.lam.size());
    for (std::size_t i = 0; i < t.lam.size(); ++i) {
      const double l2 = t.lam[i] * t.lam[i];
      total.push_back(t.g1[i] + g2 + cfg.rho_toy * l2 * (eps * eps));
    }
    t.totals.emplace_back(eps, std::move(total));
  }
  return t;
}

inline std::string to_csv(const CurveTable& t) {
  std::string out;
  const auto names = t.column_names();
  for (std::size_t c = 0; c < names.size(); ++c) {
    out += (c ? "," : "") + names[c];
  }
  out += '\n';
  for (std::size_t i = 0; i < t.lam.size(); ++i) {
    out += format_double(t.lam[i]) + "," + format_double(t.g1[i]);
    for (const auto& [eps, col] : t.totals) {
      out += "," + format_double(col[i]);
    }
    out += '\n';
  }
  return out;
}

}  // namespace bregdecomp::harness

#endif  // BREGDECOMP_HARNESS_GAUSSIAN_DEMO_HPP
