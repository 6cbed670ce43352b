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

#ifndef BREGDECOMP_EMPIRICAL_HPP
#define BREGDECOMP_EMPIRICAL_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <future>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <bregdecomp/errors.hpp>

/**
 * \file
 * \brief Assumption-light 2×2 estimation of the penalty components from logged outcomes.
 *
 * Regime labels are two digits: the first toggles the latency constraint, the second the
 * order constraint. So "01" is order-only and "10" is latency-only.
 */

namespace bregdecomp {

enum class Regime { k00 = 0, k01 = 1, k10 = 2, k11 = 3 };

inline constexpr std::array<Regime, 4> kAllRegimes{Regime::k00, Regime::k01, Regime::k10, Regime::k11};

inline const char* to_string(Regime r) {
  switch (r) {
    case Regime::k00:
      return "00";
    case Regime::k01:
      return "01";
    case Regime::k10:
      return "10";
    case Regime::k11:
      return "11";
  }
  return "??";
}

inline Regime parse_regime(const std::string& s) {
  if (s == "00") return Regime::k00;
  if (s == "01") return Regime::k01;
  if (s == "10") return Regime::k10;
  if (s == "11") return Regime::k11;
  throw InvalidInput("invalid regime label '" + s + "' (expected 00, 01, 10 or 11)");
}

/// One logged outcome.
struct WeightedSample {
  /// Realized loss.
  double y = 0.0;
  /// Selection (inverse-propensity) weight.
  double w_sel = 1.0;
  /// Censoring (inverse-probability-of-censoring) weight.
  double w_cens = 1.0;
  /// Outcome-model prediction, required by the doubly robust estimator.
  std::optional<double> mhat;
  std::string cluster_id;
  Regime regime = Regime::k00;

  [[nodiscard]] double weight() const noexcept { return w_sel * w_cens; }
};

inline void validate(const WeightedSample& s) {
  if (!std::isfinite(s.y)) {
    throw InvalidInput("sample: loss must be finite");
  }
  if (!(s.w_sel > 0.0) || !std::isfinite(s.w_sel) || !(s.w_cens > 0.0) || !std::isfinite(s.w_cens)) {
    throw InvalidInput("sample: weights must be finite and strictly positive");
  }
  if (s.mhat && !std::isfinite(*s.mhat)) {
    throw InvalidInput("sample: mhat must be finite when present");
  }
}

struct WeightedEstimate {
  double estimate = 0.0;
  /// (Σw)² / Σw² on the truncated weights.
  double ess = 0.0;
  /// Fraction of samples whose untruncated weight exceeds the threshold.
  double clipping_pct = 0.0;
};

/// (Σw)² / Σw².
inline double effective_sample_size(std::span<const double> w) {
  double s = 0.0;
  double s2 = 0.0;
  for (const double v : w) {
    s += v;
    s2 += v * v;
  }
  return s2 > 0.0 ? s * s / s2 : 0.0;
}

namespace detail {

struct Truncated {
  std::vector<double> w;
  double clipping_pct;
};

inline Truncated truncate(std::span<const WeightedSample> samples, double trunc_c) {
  if (samples.empty()) {
    throw InvalidInput("weighted mean: empty sample");
  }
  if (!(trunc_c >= 1.0)) {
    throw InvalidInput("weighted mean: truncation threshold must be >= 1");
  }
  Truncated t;
  t.w.reserve(samples.size());
  std::size_t clipped = 0;
  for (const auto& s : samples) {
    validate(s);
    const double w = s.weight();
    if (!std::isfinite(w)) {
      throw InvalidInput("weighted mean: non-finite weight product");
    }
    if (w > trunc_c) {
      ++clipped;
    }
    t.w.push_back(std::min(w, trunc_c));
  }
  t.clipping_pct = static_cast<double>(clipped) / static_cast<double>(samples.size());
  return t;
}

}  // namespace detail

/// Stabilized (Hájek) inverse-probability-weighted mean with weights truncated at trunc_c.
inline WeightedEstimate ipw_mean(std::span<const WeightedSample> samples, double trunc_c) {
  const auto t = detail::truncate(samples, trunc_c);
  double sw = 0.0;
  double swy = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    sw += t.w[i];
    swy += t.w[i] * samples[i].y;
  }
  return {swy / sw, effective_sample_size(t.w), t.clipping_pct};
}

/// mean(mhat) + Σw(y − mhat)/Σw with truncated stabilized weights.
inline WeightedEstimate dr_mean(std::span<const WeightedSample> samples, double trunc_c) {
  const auto t = detail::truncate(samples, trunc_c);
  double sm = 0.0;
  double sw = 0.0;
  double swr = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!samples[i].mhat) {
      throw InvalidInput("dr_mean: sample " + std::to_string(i) + " has no outcome-model prediction");
    }
    const double m = *samples[i].mhat;
    sm += m;
    sw += t.w[i];
    swr += t.w[i] * (samples[i].y - m);
  }
  return {sm / static_cast<double>(samples.size()) + swr / sw, effective_sample_size(t.w), t.clipping_pct};
}

/// P̂(w > c)·y_sup + tail_kappa / c.
inline double truncation_bias_bound(std::span<const WeightedSample> samples, double trunc_c, double y_sup,
                                    double tail_kappa) {
  if (!(tail_kappa >= 0.0)) {
    throw InvalidInput("truncation_bias_bound: tail_kappa must be nonnegative");
  }
  double max_abs = 0.0;
  for (const auto& s : samples) {
    max_abs = std::max(max_abs, std::abs(s.y));
  }
  if (y_sup < max_abs) {
    throw InvalidInput("truncation_bias_bound: y_sup is below the largest observed |y|");
  }
  const auto t = detail::truncate(samples, trunc_c);
  return t.clipping_pct * y_sup + tail_kappa / trunc_c;
}

/// Linear-interpolation quantile (the numpy default), q in [0, 1].
inline double quantile(std::vector<double> v, double q) {
  if (v.empty()) {
    throw InvalidInput("quantile: empty input");
  }
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

/// Default truncation: the 99.5th percentile of the weights, never below 1.
inline double default_truncation(std::span<const WeightedSample> samples) {
  std::vector<double> w;
  w.reserve(samples.size());
  for (const auto& s : samples) {
    w.push_back(s.weight());
  }
  return std::max(1.0, quantile(std::move(w), 0.995));
}

enum class Estimator { kIpw, kDr };

struct RegimeDiagnostics {
  std::size_t n = 0;
  double ess = 0.0;
  double clipping_pct = 0.0;
  double trunc_threshold = 1.0;
  /// Same estimator with no truncation, reported next to the truncated value.
  double untruncated_estimate = 0.0;
};

struct RegimeTable {
  /// Indexed by Regime: L00, L01, L10, L11.
  std::array<double, 4> loss{};
  std::array<RegimeDiagnostics, 4> diag{};

  [[nodiscard]] double L(Regime r) const { return loss[static_cast<std::size_t>(r)]; }
  [[nodiscard]] const RegimeDiagnostics& diagnostics(Regime r) const { return diag[static_cast<std::size_t>(r)]; }

  static RegimeTable from_losses(double l00, double l01, double l10, double l11) {
    RegimeTable t;
    t.loss = {l00, l01, l10, l11};
    return t;
  }
};

/**
 * Per-regime weighted means. `trunc_c` applies to every regime; when unset each regime is
 * truncated at its own default_truncation().
 */
inline RegimeTable build_regime_table(std::span<const WeightedSample> samples, Estimator estimator,
                                      std::optional<double> trunc_c = std::nullopt) {
  std::array<std::vector<WeightedSample>, 4> by_regime;
  for (const auto& s : samples) {
    by_regime[static_cast<std::size_t>(s.regime)].push_back(s);
  }
  RegimeTable table;
  for (const Regime r : kAllRegimes) {
    const auto& rs = by_regime[static_cast<std::size_t>(r)];
    if (rs.empty()) {
      throw InvalidInput(std::string("build_regime_table: no samples for regime ") + to_string(r));
    }
    const double c = trunc_c ? *trunc_c : default_truncation(rs);
    auto run = [&](double threshold) {
      return estimator == Estimator::kIpw ? ipw_mean(rs, threshold) : dr_mean(rs, threshold);
    };
    const WeightedEstimate est = run(c);
    const WeightedEstimate raw = run(std::numeric_limits<double>::infinity());
    auto& d = table.diag[static_cast<std::size_t>(r)];
    table.loss[static_cast<std::size_t>(r)] = est.estimate;
    d.n = rs.size();
    d.ess = est.ess;
    d.clipping_pct = est.clipping_pct;
    d.trunc_threshold = c;
    d.untruncated_estimate = raw.estimate;
  }
  return table;
}

enum class Convention {
  /// g2 = L01 − L00, g1 = L11 − L01.
  kSequential,
  /// g2 = L01 − L00, g1 = L10 − L00 (increments over the unconstrained regime).
  kBaseline,
};

inline const char* to_string(Convention c) { return c == Convention::kSequential ? "sequential" : "baseline"; }

inline Convention parse_convention(const std::string& s) {
  if (s == "sequential") return Convention::kSequential;
  if (s == "baseline") return Convention::kBaseline;
  throw InvalidInput("invalid convention '" + s + "' (expected sequential or baseline)");
}

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct ComponentEstimates {
  double g1_hat = 0.0;
  double g2_hat = 0.0;
  double g12_hat = 0.0;
  double g12_clipped = 0.0;
  Convention convention = Convention::kSequential;
  std::optional<Interval> ci_g1;
  std::optional<Interval> ci_g2;
  std::optional<Interval> ci_g12;
  std::optional<Interval> sutva_interval;
  /// ĝ2 + ĝ1 + [ĝ12]₊ − Δ_SUTVA, floored at 0.
  double lower_bound = 0.0;
};

inline ComponentEstimates estimate_components(const RegimeTable& t, Convention convention) {
  const double l00 = t.L(Regime::k00);
  const double l01 = t.L(Regime::k01);
  const double l10 = t.L(Regime::k10);
  const double l11 = t.L(Regime::k11);
  ComponentEstimates e;
  e.convention = convention;
  e.g2_hat = l01 - l00;
  e.g1_hat = convention == Convention::kSequential ? l11 - l01 : l10 - l00;
  e.g12_hat = l11 - l01 - l10 + l00;
  e.g12_clipped = std::max(0.0, e.g12_hat);
  e.lower_bound = std::max(0.0, e.g2_hat + e.g1_hat + e.g12_clipped);
  return e;
}

/// ĝ2 + ĝ1 + [ĝ12]₊ − Δ_SUTVA, floored at zero.
inline double empirical_lower_bound(const ComponentEstimates& est, double delta_sutva) {
  if (!(delta_sutva >= 0.0)) {
    throw InvalidInput("empirical_lower_bound: delta_sutva must be nonnegative");
  }
  return std::max(0.0, est.g2_hat + est.g1_hat + std::max(0.0, est.g12_hat) - delta_sutva);
}

inline Interval sutva_interval(double g12_naive, double delta_sutva) {
  if (!(delta_sutva >= 0.0)) {
    throw InvalidInput("sutva_interval: delta_sutva must be nonnegative");
  }
  return {g12_naive - delta_sutva, g12_naive + delta_sutva};
}

enum class GuardrailVerdict { kGuarantee, kMonitoringOnly };

inline const char* to_string(GuardrailVerdict v) {
  return v == GuardrailVerdict::kGuarantee ? "guarantee" : "monitoring_only";
}

/// monitoring_only when any regime's ESS is below min_ess (equality passes).
inline GuardrailVerdict ess_guardrail(const std::array<RegimeDiagnostics, 4>& diag, double min_ess = 100.0) {
  if (!(min_ess > 0.0)) {
    throw InvalidInput("ess_guardrail: min_ess must be positive");
  }
  for (const auto& d : diag) {
    if (d.ess < min_ess) {
      return GuardrailVerdict::kMonitoringOnly;
    }
  }
  return GuardrailVerdict::kGuarantee;
}

using Statistic = std::function<double(std::span<const WeightedSample>)>;

enum class StatisticName { kG1, kG2, kG12, kG12Clipped, kLowerBound };

inline StatisticName parse_statistic(const std::string& s) {
  if (s == "g1") return StatisticName::kG1;
  if (s == "g2") return StatisticName::kG2;
  if (s == "g12") return StatisticName::kG12;
  if (s == "g12_clipped") return StatisticName::kG12Clipped;
  if (s == "lower_bound") return StatisticName::kLowerBound;
  throw InvalidInput("unknown statistic '" + s + "'");
}

/// A named component computed by the full pipeline: regime table, then component estimates.
inline Statistic pipeline_statistic(StatisticName name, Convention convention, Estimator estimator,
                                    std::optional<double> trunc_c) {
  return [=](std::span<const WeightedSample> s) {
    const auto est = estimate_components(build_regime_table(s, estimator, trunc_c), convention);
    switch (name) {
      case StatisticName::kG1:
        return est.g1_hat;
      case StatisticName::kG2:
        return est.g2_hat;
      case StatisticName::kG12:
        return est.g12_hat;
      case StatisticName::kG12Clipped:
        return est.g12_clipped;
      case StatisticName::kLowerBound:
        return est.lower_bound;
    }
    return 0.0;
  };
}

namespace detail {

/// SplitMix64 finalizer; maps consecutive integers to well-separated seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

/**
 * Percentile interval of `statistic` over cluster-bootstrap replicates. Clusters are resampled
 * with replacement and the statistic is recomputed on each replicate. Replicate r draws from
 * its own generator seeded with the sequence (seed, r), so the result does not depend on how
 * the replicates are scheduled across threads.
 */
inline Interval cluster_bootstrap(std::span<const WeightedSample> samples, const Statistic& statistic, int n_boot,
                                  double confidence, std::uint64_t seed, unsigned threads = 0) {
  if (n_boot < 100) {
    throw InvalidInput("cluster_bootstrap: n_boot must be >= 100");
  }
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw InvalidInput("cluster_bootstrap: confidence must lie in (0, 1)");
  }
  std::map<std::string, std::vector<std::size_t>> index;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    index[samples[i].cluster_id].push_back(i);
  }
  if (index.size() < 2) {
    throw InvalidInput("cluster_bootstrap: need at least two distinct clusters");
  }
  std::vector<const std::vector<std::size_t>*> clusters;
  clusters.reserve(index.size());
  for (const auto& [id, rows] : index) {
    clusters.push_back(&rows);
  }

  auto replicate = [&](int r) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(r)};
    std::mt19937_64 rng(seq);
    std::uniform_int_distribution<std::size_t> pick(0, clusters.size() - 1);
    std::vector<WeightedSample> resample;
    resample.reserve(samples.size());
    for (std::size_t k = 0; k < clusters.size(); ++k) {
      for (const std::size_t row : *clusters[pick(rng)]) {
        resample.push_back(samples[row]);
      }
    }
    return statistic(resample);
  };

  std::vector<double> values(static_cast<std::size_t>(n_boot));
  const unsigned hw = threads != 0 ? threads : std::max(1U, std::thread::hardware_concurrency());
  const unsigned workers = std::min<unsigned>(hw, static_cast<unsigned>(n_boot));
  std::vector<std::future<void>> jobs;
  for (unsigned w = 0; w < workers; ++w) {
    jobs.push_back(std::async(std::launch::async, [&, w] {
      for (int r = static_cast<int>(w); r < n_boot; r += static_cast<int>(workers)) {
        values[static_cast<std::size_t>(r)] = replicate(r);
      }
    }));
  }
  for (auto& j : jobs) {
    j.get();
  }
  const double alpha = 1.0 - confidence;
  return {quantile(values, alpha / 2.0), quantile(values, 1.0 - alpha / 2.0)};
}

}  // namespace bregdecomp

#endif  // BREGDECOMP_EMPIRICAL_HPP
