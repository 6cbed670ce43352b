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

#ifndef BREGDECOMP_HARNESS_PIPELINE_HPP
#define BREGDECOMP_HARNESS_PIPELINE_HPP

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include <bregdecomp/calibration.hpp>
#include <bregdecomp/decomposition.hpp>
#include <bregdecomp/empirical.hpp>
#include <bregdecomp/errors.hpp>
#include <bregdecomp/harness/config.hpp>
#include <bregdecomp/harness/format.hpp>
#include <bregdecomp/harness/gaussian_demo.hpp>
#include <bregdecomp/harness/io.hpp>
#include <bregdecomp/harness/simulate.hpp>

namespace bregdecomp::harness {

inline constexpr int kSchemaVersion = 1;

struct Report {
  nlohmann::ordered_json document;
  /// File name → CSV contents, in emission order.
  std::vector<std::pair<std::string, std::string>> tables;
  std::vector<std::string> warnings;
};

namespace detail {

using ojson = nlohmann::ordered_json;

inline ojson to_json(const Point& p) {
  ojson a = ojson::array();
  for (Eigen::Index i = 0; i < p.coords.size(); ++i) {
    a.push_back(p.coords(i));
  }
  return a;
}

inline ojson to_json(const std::optional<Interval>& i) {
  if (!i) {
    return nullptr;
  }
  return ojson{{"lo", i->lo}, {"hi", i->hi}};
}

inline ojson to_json(const MonotoneCurve& c) {
  return ojson{{"knots", c.knots}, {"values", c.values}, {"weights", c.weights}};
}

template <class T>
T require(const std::optional<T>& v, const char* field, Mode mode) {
  if (!v) {
    throw InvalidInput(std::string("config: mode '") + to_string(mode) + "' requires field '" + field + "'");
  }
  return *v;
}

/// Δ_ncx from the config; ζ may be given directly or through its upper bound.
inline NcxPenalty ncx_from(const NcxSpec& spec, double g1, double g2, std::vector<std::string>& warnings) {
  double zeta = spec.zeta.value_or(0.0);
  if (spec.zeta_bound) {
    const auto& z = *spec.zeta_bound;
    zeta = zeta_upper_bound(z.rho, z.alpha, g2, g1, z.c_const, z.kappa_hat, z.d_lam, z.d_eps);
  } else if (!spec.zeta) {
    warnings.emplace_back("ncx.zeta not given; curvature remainder taken as 0");
  }
  return NcxPenalty::make(spec.delta_relax.value_or(0.0), zeta, spec.delta_emp);
}

inline void add_reporting(ojson& doc, double g1, double g2, double g12, const NcxPenalty& ncx, double extra_delta,
                          double penalty_eps) {
  const double delta = ncx.total() + extra_delta;
  const PenaltyRatio pr = penalty_ratio(delta, g1, g2, g12, penalty_eps);
  doc["ncx"] = ojson{{"delta_relax", ncx.delta_relax}, {"zeta", ncx.zeta}, {"delta_emp", ncx.delta_emp},
                     {"delta_sutva", extra_delta}, {"delta_total", delta}};
  doc["LB_safe"] = lb_safe(g1, g2, g12, delta);
  doc["penalty_ratio"] = pr.r;
  doc["verdict"] = to_string(pr.verdict);
}

inline ojson decomposition_json(const DecompositionReport& r) {
  ojson j{{"g2", r.g2},
          {"g1", r.g1},
          {"g12", r.g12},
          {"total", r.total},
          {"a", to_json(r.a)},
          {"b", to_json(r.b)},
          {"joint", to_json(r.joint)},
          {"b_joint", to_json(r.b_joint)},
          {"orthogonality_residual", r.orthogonality_residual},
          {"orthogonal", r.orthogonal},
          {"normal_alignment", nullptr},
          {"conservative", r.conservative},
          {"hull_is_exact", nullptr}};
  if (r.normal_alignment) {
    j["normal_alignment"] = *r.normal_alignment;
  }
  if (r.hull_is_exact) {
    j["hull_is_exact"] = *r.hull_is_exact;
  }
  return j;
}

inline Report run_gaussian_demo(const RunConfig& cfg) {
  Report rep;
  const CurveTable t = gaussian_curves(cfg.toy);
  ojson curves = ojson::object();
  const auto names = t.column_names();
  curves[names[0]] = t.lam;
  curves[names[1]] = t.g1;
  for (std::size_t k = 0; k < t.totals.size(); ++k) {
    curves[names[k + 2]] = t.totals[k].second;
  }
  auto& doc = rep.document;
  doc["toy"] = ojson{{"sigma2", cfg.toy.sigma2},
                     {"rho_toy", cfg.toy.rho_toy},
                     {"lam_grid", {{"start", cfg.toy.lam_start}, {"stop", cfg.toy.lam_stop}, {"points", cfg.toy.lam_points}}},
                     {"eps_list", cfg.toy.eps_list}};
  doc["curves"] = std::move(curves);
  rep.tables.emplace_back("gaussian_curves.csv", to_csv(t));
  return rep;
}

inline ConstraintSet resolve_set(const SetSpec& spec, std::optional<bool>& exact) {
  if (spec.set) {
    return *spec.set;
  }
  BoxHull h = hull_of_box_union(spec.union_boxes);
  exact = exact.value_or(true) && h.hull_is_exact;
  return h.box;
}

inline Report run_decompose(const RunConfig& cfg) {
  const Mode m = Mode::kDecompose;
  const Potential phi = require(cfg.potential, "potential", m);
  const SetSpec eps_spec = require(cfg.set_eps, "set_eps", m);
  const SetSpec lam_spec = require(cfg.set_lam, "set_lam", m);
  const Point p_star = require(cfg.p_star, "p_star", m);

  Report rep;
  std::optional<bool> exact;
  const ConstraintSet set_eps = resolve_set(eps_spec, exact);
  const ConstraintSet set_lam = resolve_set(lam_spec, exact);
  const bool relaxed = !eps_spec.set || !lam_spec.set;
  const DecompositionReport r = relaxed ? convexified_decompose(phi, set_eps, set_lam, p_star, cfg.projection, exact)
                                        : decompose(phi, set_eps, set_lam, p_star, cfg.projection);
  rep.warnings = r.warnings;
  auto& doc = rep.document;
  doc["potential"] = phi.name();
  doc["p_star"] = to_json(p_star);
  doc["components"] = decomposition_json(r);
  if (relaxed && !eps_spec.set && lam_spec.set) {
    doc["union_best_divergence"] =
        best_feasible_divergence_over_union(phi, eps_spec.union_boxes, set_lam, p_star, cfg.projection);
  }
  const NcxPenalty ncx = ncx_from(cfg.ncx, r.g1, r.g2, rep.warnings);
  add_reporting(doc, r.g1, r.g2, r.g12, ncx, 0.0, cfg.penalty_eps);

  std::string csv = "component,value\n";
  for (const auto& [k, v] : {std::pair{"g2", r.g2}, std::pair{"g1", r.g1}, std::pair{"g12", r.g12},
                             std::pair{"total", r.total}, std::pair{"LB_safe", doc["LB_safe"].get<double>()}}) {
    csv += std::string(k) + "," + format_double(v) + "\n";
  }
  rep.tables.emplace_back("components.csv", csv);
  return rep;
}

/// Regime table, components, diagnostics and bootstrap intervals for a weighted sample.
inline void estimate_into(const RunConfig& cfg, const std::vector<WeightedSample>& samples, Report& rep) {
  auto& doc = rep.document;
  const Convention convention = cfg.convention.value_or(Convention::kSequential);
  if (!cfg.convention) {
    rep.warnings.emplace_back("convention not given; using sequential");
  }
  const RegimeTable table = build_regime_table(samples, cfg.estimator, cfg.trunc_c);
  ComponentEstimates est = estimate_components(table, convention);
  const double delta_sutva = cfg.delta_sutva.value_or(0.0);
  if (cfg.delta_sutva) {
    est.sutva_interval = sutva_interval(est.g12_hat, delta_sutva);
    est.lower_bound = empirical_lower_bound(est, delta_sutva);
  }

  ojson bootstrap = nullptr;
  try {
    const std::pair<StatisticName, std::optional<Interval>*> targets[] = {
        {StatisticName::kG1, &est.ci_g1}, {StatisticName::kG2, &est.ci_g2}, {StatisticName::kG12, &est.ci_g12}};
    std::uint64_t k = 0;
    for (const auto& [name, slot] : targets) {
      *slot = cluster_bootstrap(samples, pipeline_statistic(name, convention, cfg.estimator, cfg.trunc_c),
                                cfg.bootstrap.n_boot, cfg.bootstrap.confidence, bregdecomp::detail::splitmix64(cfg.seed + k));
      ++k;
    }
    bootstrap = ojson{{"n_boot", cfg.bootstrap.n_boot}, {"confidence", cfg.bootstrap.confidence}};
  } catch (const InvalidInput& e) {
    rep.warnings.emplace_back(std::string("bootstrap skipped: ") + e.what());
  }

  ojson regimes = ojson::object();
  std::string regime_csv = "regime,n,loss,untruncated_loss,ess,clipping_pct,trunc_threshold,trunc_bias_bound\n";
  if (cfg.y_sup && !cfg.tail_kappa) {
    rep.warnings.emplace_back("tail_kappa not given; truncation bias bound uses tail_kappa = 0");
  }
  std::array<std::vector<WeightedSample>, 4> by_regime;
  for (const auto& s : samples) {
    by_regime[static_cast<std::size_t>(s.regime)].push_back(s);
  }
  for (const Regime r : kAllRegimes) {
    const auto& d = table.diagnostics(r);
    ojson j{{"n", d.n},
            {"loss", table.L(r)},
            {"untruncated_loss", d.untruncated_estimate},
            {"ess", d.ess},
            {"clipping_pct", d.clipping_pct},
            {"trunc_threshold", d.trunc_threshold},
            {"trunc_bias_bound", nullptr}};
    std::string bias_field;
    if (cfg.y_sup) {
      const double b = truncation_bias_bound(by_regime[static_cast<std::size_t>(r)], d.trunc_threshold, *cfg.y_sup,
                                             cfg.tail_kappa.value_or(0.0));
      j["trunc_bias_bound"] = b;
      bias_field = format_double(b);
    }
    regimes[to_string(r)] = std::move(j);
    regime_csv += std::string(to_string(r)) + "," + std::to_string(d.n) + "," + format_double(table.L(r)) + "," +
                  format_double(d.untruncated_estimate) + "," + format_double(d.ess) + "," +
                  format_double(d.clipping_pct) + "," + format_double(d.trunc_threshold) + "," + bias_field + "\n";
  }
  const GuardrailVerdict guard = ess_guardrail(table.diag, cfg.min_ess);
  if (guard == GuardrailVerdict::kMonitoringOnly) {
    rep.warnings.emplace_back("ESS below min_ess in at least one regime; results are monitoring-only");
  }

  const auto untruncated = [&] {
    RegimeTable raw = table;
    for (const Regime r : kAllRegimes) {
      raw.loss[static_cast<std::size_t>(r)] = table.diagnostics(r).untruncated_estimate;
    }
    return estimate_components(raw, convention);
  }();

  doc["convention"] = to_string(convention);
  doc["estimator"] = cfg.estimator == Estimator::kIpw ? "ipw" : "dr";
  doc["regimes"] = std::move(regimes);
  doc["components"] = ojson{{"g1", est.g1_hat},
                            {"g2", est.g2_hat},
                            {"g12", est.g12_hat},
                            {"g12_clipped", est.g12_clipped},
                            {"lower_bound", est.lower_bound},
                            {"ci_g1", to_json(est.ci_g1)},
                            {"ci_g2", to_json(est.ci_g2)},
                            {"ci_g12", to_json(est.ci_g12)},
                            {"sutva_interval", to_json(est.sutva_interval)}};
  doc["untruncated_components"] =
      ojson{{"g1", untruncated.g1_hat}, {"g2", untruncated.g2_hat}, {"g12", untruncated.g12_hat}};
  doc["bootstrap"] = std::move(bootstrap);
  doc["ess_guardrail"] = to_string(guard);
  const NcxPenalty ncx = ncx_from(cfg.ncx, est.g1_hat, est.g2_hat, rep.warnings);
  add_reporting(doc, est.g1_hat, est.g2_hat, est.g12_clipped, ncx, delta_sutva, cfg.penalty_eps);

  std::string comp_csv = "component,estimate,ci_lo,ci_hi\n";
  const auto row = [](const char* name, double v, const std::optional<Interval>& ci) {
    return std::string(name) + "," + format_double(v) + "," + (ci ? format_double(ci->lo) : "") + "," +
           (ci ? format_double(ci->hi) : "") + "\n";
  };
  comp_csv += row("g1", est.g1_hat, est.ci_g1);
  comp_csv += row("g2", est.g2_hat, est.ci_g2);
  comp_csv += row("g12", est.g12_hat, est.ci_g12);
  comp_csv += row("g12_clipped", est.g12_clipped, std::nullopt);
  comp_csv += row("lower_bound", est.lower_bound, std::nullopt);
  comp_csv += row("LB_safe", doc["LB_safe"].get<double>(), std::nullopt);
  rep.tables.emplace_back("regime_table.csv", regime_csv);
  rep.tables.emplace_back("components.csv", comp_csv);
}

inline Report run_estimate(const RunConfig& cfg) {
  Report rep;
  const std::string path = require(cfg.samples_path, "samples_path", Mode::kEstimate);
  std::vector<WeightedSample> samples;
  try {
    samples = read_samples_file(path);
  } catch (const InvalidInput& e) {
    throw InvalidInput("estimate: " + std::string(e.what()));
  }
  estimate_into(cfg, samples, rep);
  return rep;
}

inline Report run_simulate(const RunConfig& cfg) {
  Report rep;
  const auto samples = simulate_2x2(cfg.dgp, cfg.seed);
  auto& doc = rep.document;
  doc["dgp"] = ojson{{"mu", cfg.dgp.mu},
                     {"sigma2", cfg.dgp.sigma2},
                     {"lam_noise", cfg.dgp.lam_noise},
                     {"eps_shift", cfg.dgp.eps_shift},
                     {"interaction_corr", cfg.dgp.interaction_corr},
                     {"n", cfg.dgp.n},
                     {"n_clusters", cfg.dgp.n_clusters}};
  // Population values of the estimands under the convention in use; ĝ1 targets λ²/(2σ²) only
  // under the baseline convention, while the sequential ĝ1 also absorbs the interaction.
  const auto truth = estimate_components(cfg.dgp.population_losses(), cfg.convention.value_or(Convention::kSequential));
  doc["truth"] = ojson{{"g1", truth.g1_hat},
                       {"g2", truth.g2_hat},
                       {"g12", truth.g12_hat},
                       {"lam_noise_penalty", cfg.dgp.true_g1()}};
  estimate_into(cfg, samples, rep);
  rep.tables.emplace(rep.tables.begin(), "samples.csv", samples_to_csv(samples));
  return rep;
}

inline Report run_calibrate(const RunConfig& cfg) {
  Report rep;
  const std::string path = require(cfg.observations_path, "observations_path", Mode::kCalibrate);
  std::vector<GradedObservation> obs;
  try {
    obs = read_observations_file(path);
  } catch (const InvalidInput& e) {
    throw InvalidInput("calibrate: " + std::string(e.what()));
  }
  const PenaltySurfaces s = fit_penalty_surfaces(obs);
  rep.warnings = s.warnings;
  auto& doc = rep.document;
  ojson cells = ojson::array();
  std::string residual_csv = "lam,eps,mean_loss,residual\n";
  for (const auto& c : s.interaction_residual) {
    cells.push_back(ojson{{"lam", c.lam}, {"eps", c.eps}, {"mean_loss", c.mean_loss}, {"residual", c.residual}});
    residual_csv += format_double(c.lam) + "," + format_double(c.eps) + "," + format_double(c.mean_loss) + "," +
                    format_double(c.residual) + "\n";
  }
  doc["baseline"] = s.baseline;
  doc["g1_curve"] = to_json(s.g1_curve);
  doc["g2_curve"] = to_json(s.g2_curve);
  doc["interaction_residual"] = std::move(cells);
  const auto curve_csv = [](const char* x, const MonotoneCurve& c) {
    std::string out = std::string(x) + ",value,weight\n";
    for (std::size_t i = 0; i < c.knots.size(); ++i) {
      out += format_double(c.knots[i]) + "," + format_double(c.values[i]) + "," + format_double(c.weights[i]) + "\n";
    }
    return out;
  };
  rep.tables.emplace_back("g1_curve.csv", curve_csv("lam", s.g1_curve));
  rep.tables.emplace_back("g2_curve.csv", curve_csv("eps", s.g2_curve));
  rep.tables.emplace_back("interaction_residual.csv", residual_csv);
  return rep;
}

}  // namespace detail

/// Runs one mode. The document always leads with the schema version, mode, seed and input echo.
inline Report run_pipeline(const RunConfig& cfg) {
  Report body;
  switch (cfg.mode) {
    case Mode::kGaussianDemo:
      body = detail::run_gaussian_demo(cfg);
      break;
    case Mode::kDecompose:
      body = detail::run_decompose(cfg);
      break;
    case Mode::kEstimate:
      body = detail::run_estimate(cfg);
      break;
    case Mode::kCalibrate:
      body = detail::run_calibrate(cfg);
      break;
    case Mode::kSimulate:
      body = detail::run_simulate(cfg);
      break;
  }
  Report rep;
  auto& doc = rep.document;
  doc["schema_version"] = kSchemaVersion;
  doc["mode"] = to_string(cfg.mode);
  doc["seed"] = cfg.seed;
  doc["inputs"] = cfg.echo;
  for (auto& [k, v] : body.document.items()) {
    doc[k] = std::move(v);
  }
  doc["warnings"] = body.warnings;
  rep.tables = std::move(body.tables);
  rep.warnings = std::move(body.warnings);
  return rep;
}

/// Writes report.json, or the CSV tables, into `dir` (created if missing).
inline std::vector<std::filesystem::path> write_report(const Report& rep, const std::filesystem::path& dir,
                                                       const std::string& format) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  auto emit = [&](const std::string& name, const std::string& contents) {
    const auto path = dir / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) {
      throw InvalidInput("cannot write '" + path.string() + "'");
    }
    out << contents;
    written.push_back(path);
  };
  if (format == "csv") {
    for (const auto& [name, contents] : rep.tables) {
      emit(name, contents);
    }
  } else {
    emit("report.json", rep.document.dump(2) + "\n");
  }
  return written;
}

}  // namespace bregdecomp::harness

#endif  // BREGDECOMP_HARNESS_PIPELINE_HPP
