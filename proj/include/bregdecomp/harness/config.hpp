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

#ifndef BREGDECOMP_HARNESS_CONFIG_HPP
#define BREGDECOMP_HARNESS_CONFIG_HPP

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <bregdecomp/constraint_set.hpp>
#include <bregdecomp/decomposition.hpp>
#include <bregdecomp/empirical.hpp>
#include <bregdecomp/errors.hpp>
#include <bregdecomp/harness/gaussian_demo.hpp>
#include <bregdecomp/harness/simulate.hpp>
#include <bregdecomp/potential.hpp>

namespace bregdecomp::harness {

enum class Mode { kGaussianDemo, kDecompose, kEstimate, kCalibrate, kSimulate };

inline const char* to_string(Mode m) {
  switch (m) {
    case Mode::kGaussianDemo:
      return "gaussian-demo";
    case Mode::kDecompose:
      return "decompose";
    case Mode::kEstimate:
      return "estimate";
    case Mode::kCalibrate:
      return "calibrate";
    case Mode::kSimulate:
      return "simulate";
  }
  return "unknown";
}

inline Mode parse_mode(const std::string& s) {
  for (const Mode m : {Mode::kGaussianDemo, Mode::kDecompose, Mode::kEstimate, Mode::kCalibrate, Mode::kSimulate}) {
    if (s == to_string(m)) {
      return m;
    }
  }
  throw InvalidInput("field 'mode': unknown mode '" + s + "'");
}

/// A constraint set as written in a config; box_union is relaxed to its bounding box.
struct SetSpec {
  std::optional<ConstraintSet> set;
  std::vector<Box> union_boxes;
};

struct ZetaSpec {
  double rho = 0.0;
  double alpha = 1.0;
  double c_const = 0.0;
  double kappa_hat = 0.0;
  double d_lam = 0.0;
  double d_eps = 0.0;
};

struct NcxSpec {
  std::optional<double> delta_relax;
  std::optional<double> zeta;
  std::optional<ZetaSpec> zeta_bound;
  double delta_emp = 0.0;
};

struct BootstrapSpec {
  int n_boot = 200;
  double confidence = 0.95;
};

/// Every field of a run. Field names match the config document keys.
struct RunConfig {
  Mode mode = Mode::kGaussianDemo;
  std::uint64_t seed = 0;
  std::optional<Potential> potential;
  std::optional<SetSpec> set_eps;
  std::optional<SetSpec> set_lam;
  std::optional<Point> p_star;
  ProjectionOptions projection;
  NcxSpec ncx;
  double penalty_eps = 1e-9;
  std::optional<Convention> convention;
  Estimator estimator = Estimator::kIpw;
  std::optional<std::string> samples_path;
  std::optional<std::string> observations_path;
  std::optional<double> trunc_c;
  BootstrapSpec bootstrap;
  std::optional<double> delta_sutva;
  double min_ess = 100.0;
  std::optional<double> y_sup;
  std::optional<double> tail_kappa;
  DGPConfig dgp;
  ToyConfig toy;
  std::optional<std::string> output_dir;
  std::string output_format = "json";
  /// The parsed document, echoed into reports.
  nlohmann::ordered_json echo = nlohmann::ordered_json::object();
};

namespace detail {

using nlohmann::json;

inline void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.contains(key)) {
      throw InvalidInput("config: unknown field '" + where + key + "'");
    }
  }
}

inline const json& require_object(const json& j, const std::string& field) {
  if (!j.is_object()) {
    throw InvalidInput("config: field '" + field + "': expected an object");
  }
  return j;
}

inline double get_number(const json& j, const std::string& field) {
  if (!j.is_number()) {
    throw InvalidInput("config: field '" + field + "': expected a number");
  }
  return j.get<double>();
}

/// Numbers, with null standing for ±infinity (`fill`) in bound vectors.
inline Eigen::VectorXd get_vector(const json& j, const std::string& field,
                                  std::optional<double> null_fill = std::nullopt) {
  if (!j.is_array() || j.empty()) {
    throw InvalidInput("config: field '" + field + "': expected a nonempty array of numbers");
  }
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (j[i].is_null() && null_fill) {
      v(static_cast<Eigen::Index>(i)) = *null_fill;
    } else {
      v(static_cast<Eigen::Index>(i)) = get_number(j[i], field + "[" + std::to_string(i) + "]");
    }
  }
  return v;
}

inline const json& at(const json& obj, const std::string& key, const std::string& field) {
  if (!obj.contains(key)) {
    throw InvalidInput("config: missing field '" + field + key + "'");
  }
  return obj.at(key);
}

inline Box parse_box(const json& j, const std::string& field) {
  require_object(j, field);
  const double inf = std::numeric_limits<double>::infinity();
  Box b{get_vector(at(j, "lo", field + "."), field + ".lo", -inf), get_vector(at(j, "hi", field + "."), field + ".hi", inf)};
  ConstraintSet::box(b.lo, b.hi);  // validates
  return b;
}

inline ConstraintSet parse_set(const json& j, const std::string& field) {
  require_object(j, field);
  if (!j.contains("type") || !j.at("type").is_string()) {
    throw InvalidInput("config: field '" + field + ".type': expected a string");
  }
  const std::string type = j.at("type").get<std::string>();
  const std::string p = field + ".";
  const double inf = std::numeric_limits<double>::infinity();
  try {
    if (type == "whole") {
      reject_unknown(j, {"type", "dim"}, p);
      return ConstraintSet::whole(static_cast<std::size_t>(get_number(at(j, "dim", p), p + "dim")));
    }
    if (type == "halfspace") {
      reject_unknown(j, {"type", "a", "b"}, p);
      return ConstraintSet::halfspace(get_vector(at(j, "a", p), p + "a"), get_number(at(j, "b", p), p + "b"));
    }
    if (type == "box") {
      reject_unknown(j, {"type", "lo", "hi"}, p);
      return ConstraintSet::box(get_vector(at(j, "lo", p), p + "lo", -inf), get_vector(at(j, "hi", p), p + "hi", inf));
    }
    if (type == "simplex_subset") {
      reject_unknown(j, {"type", "lo", "hi"}, p);
      return ConstraintSet::simplex_subset(get_vector(at(j, "lo", p), p + "lo"), get_vector(at(j, "hi", p), p + "hi"));
    }
    if (type == "affine") {
      reject_unknown(j, {"type", "A", "c"}, p);
      const json& rows = at(j, "A", p);
      if (!rows.is_array() || rows.empty()) {
        throw InvalidInput("config: field '" + p + "A': expected a nonempty array of rows");
      }
      Eigen::MatrixXd A;
      for (std::size_t r = 0; r < rows.size(); ++r) {
        const Eigen::VectorXd row = get_vector(rows[r], p + "A[" + std::to_string(r) + "]");
        if (r == 0) {
          A.resize(static_cast<Eigen::Index>(rows.size()), row.size());
        } else if (row.size() != A.cols()) {
          throw InvalidInput("config: field '" + p + "A': rows have different lengths");
        }
        A.row(static_cast<Eigen::Index>(r)) = row.transpose();
      }
      return ConstraintSet::affine(A, get_vector(at(j, "c", p), p + "c"));
    }
    if (type == "intersection") {
      reject_unknown(j, {"type", "members"}, p);
      const json& members = at(j, "members", p);
      if (!members.is_array() || members.empty()) {
        throw InvalidInput("config: field '" + p + "members': expected a nonempty array");
      }
      std::vector<ConstraintSet> sets;
      for (std::size_t i = 0; i < members.size(); ++i) {
        sets.push_back(parse_set(members[i], p + "members[" + std::to_string(i) + "]"));
      }
      return ConstraintSet::intersection(std::move(sets));
    }
  } catch (const InvalidInput& e) {
    const std::string msg = e.what();
    throw InvalidInput(msg.rfind("config:", 0) == 0 ? msg : "config: field '" + field + "': " + msg);
  }
  throw InvalidInput("config: field '" + field + ".type': unknown set type '" + type + "'");
}

inline SetSpec parse_set_spec(const json& j, const std::string& field) {
  require_object(j, field);
  if (j.contains("type") && j.at("type") == "box_union") {
    reject_unknown(j, {"type", "boxes"}, field + ".");
    const json& boxes = at(j, "boxes", field + ".");
    if (!boxes.is_array() || boxes.empty()) {
      throw InvalidInput("config: field '" + field + ".boxes': expected a nonempty array");
    }
    SetSpec spec;
    for (std::size_t i = 0; i < boxes.size(); ++i) {
      spec.union_boxes.push_back(parse_box(boxes[i], field + ".boxes[" + std::to_string(i) + "]"));
    }
    return spec;
  }
  return SetSpec{parse_set(j, field), {}};
}

inline Potential parse_potential(const json& j) {
  require_object(j, "potential");
  reject_unknown(j, {"kind", "dim", "weights"}, "potential.");
  const json& kind = at(j, "kind", "potential.");
  if (!kind.is_string()) {
    throw InvalidInput("config: field 'potential.kind': expected a string");
  }
  const std::string k = kind.get<std::string>();
  if (k == "gaussian_natural") {
    return Potential::gaussian_natural();
  }
  const auto dim = static_cast<std::size_t>(get_number(at(j, "dim", "potential."), "potential.dim"));
  try {
    if (k == "squared_euclidean") {
      return Potential::squared_euclidean(dim, j.contains("weights") ? get_vector(j.at("weights"), "potential.weights")
                                                                     : Eigen::VectorXd{});
    }
    if (k == "negative_entropy") {
      return Potential::negative_entropy(dim);
    }
  } catch (const InvalidInput& e) {
    throw InvalidInput(std::string("config: field 'potential': ") + e.what());
  }
  throw InvalidInput("config: field 'potential.kind': unknown potential '" + k + "'");
}

/// Byte offset → 1-based line number.
inline std::size_t line_of(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    line += text[i] == '\n' ? 1 : 0;
  }
  return line;
}

}  // namespace detail

/// Parses a run configuration document. Errors name the offending line or field.
inline RunConfig parse_config(const std::string& text) {
  using nlohmann::json;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidInput("config: line " + std::to_string(detail::line_of(text, e.byte)) + ": " + e.what());
  }
  detail::require_object(j, "<root>");
  detail::reject_unknown(j,
                         {"mode", "seed", "potential", "set_eps", "set_lam", "p_star", "projection", "ncx",
                          "penalty_eps", "convention", "estimator", "samples_path", "observations_path", "trunc_c",
                          "bootstrap", "delta_sutva", "min_ess", "y_sup", "tail_kappa", "dgp", "toy", "output"},
                         "");
  RunConfig cfg;
  cfg.echo = nlohmann::ordered_json::parse(text);
  auto str = [&](const char* key) {
    if (!j.at(key).is_string()) {
      throw InvalidInput(std::string("config: field '") + key + "': expected a string");
    }
    return j.at(key).get<std::string>();
  };
  auto num = [&](const json& obj, const char* key, const std::string& field) {
    return detail::get_number(obj.at(key), field);
  };
  if (j.contains("mode")) {
    cfg.mode = parse_mode(str("mode"));
  }
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) {
      throw InvalidInput("config: field 'seed': expected a nonnegative integer");
    }
    cfg.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("potential")) {
    cfg.potential = detail::parse_potential(j.at("potential"));
  }
  if (j.contains("set_eps")) {
    cfg.set_eps = detail::parse_set_spec(j.at("set_eps"), "set_eps");
  }
  if (j.contains("set_lam")) {
    cfg.set_lam = detail::parse_set_spec(j.at("set_lam"), "set_lam");
  }
  if (j.contains("p_star")) {
    cfg.p_star = Point{detail::get_vector(j.at("p_star"), "p_star")};
  }
  if (j.contains("projection")) {
    const json& p = detail::require_object(j.at("projection"), "projection");
    detail::reject_unknown(p, {"max_iterations", "tolerance", "interior_margin"}, "projection.");
    if (p.contains("max_iterations")) {
      cfg.projection.max_iterations = static_cast<int>(num(p, "max_iterations", "projection.max_iterations"));
    }
    if (p.contains("tolerance")) {
      cfg.projection.tolerance = num(p, "tolerance", "projection.tolerance");
    }
    if (p.contains("interior_margin")) {
      cfg.projection.interior_margin = num(p, "interior_margin", "projection.interior_margin");
    }
    cfg.projection.validate();
  }
  if (j.contains("ncx")) {
    const json& n = detail::require_object(j.at("ncx"), "ncx");
    detail::reject_unknown(n, {"delta_relax", "zeta", "zeta_bound", "delta_emp"}, "ncx.");
    if (n.contains("delta_relax")) {
      cfg.ncx.delta_relax = num(n, "delta_relax", "ncx.delta_relax");
    }
    if (n.contains("zeta")) {
      cfg.ncx.zeta = num(n, "zeta", "ncx.zeta");
    }
    if (n.contains("delta_emp")) {
      cfg.ncx.delta_emp = num(n, "delta_emp", "ncx.delta_emp");
    }
    if (n.contains("zeta_bound")) {
      const json& z = detail::require_object(n.at("zeta_bound"), "ncx.zeta_bound");
      detail::reject_unknown(z, {"rho", "alpha", "c_const", "kappa_hat", "d_lam", "d_eps"}, "ncx.zeta_bound.");
      ZetaSpec zs;
      // c and κ̂ are problem-dependent; they are never defaulted.
      zs.rho = num(z, "rho", "ncx.zeta_bound.rho");
      zs.alpha = num(z, "alpha", "ncx.zeta_bound.alpha");
      for (const char* key : {"c_const", "kappa_hat", "d_lam", "d_eps"}) {
        if (!z.contains(key)) {
          throw InvalidInput(std::string("config: missing field 'ncx.zeta_bound.") + key + "'");
        }
      }
      zs.c_const = num(z, "c_const", "ncx.zeta_bound.c_const");
      zs.kappa_hat = num(z, "kappa_hat", "ncx.zeta_bound.kappa_hat");
      zs.d_lam = num(z, "d_lam", "ncx.zeta_bound.d_lam");
      zs.d_eps = num(z, "d_eps", "ncx.zeta_bound.d_eps");
      cfg.ncx.zeta_bound = zs;
    }
    if (cfg.ncx.zeta && cfg.ncx.zeta_bound) {
      throw InvalidInput("config: fields 'ncx.zeta' and 'ncx.zeta_bound' are mutually exclusive");
    }
  }
  if (j.contains("penalty_eps")) {
    cfg.penalty_eps = detail::get_number(j.at("penalty_eps"), "penalty_eps");
  }
  if (j.contains("convention")) {
    cfg.convention = parse_convention(str("convention"));
  }
  if (j.contains("estimator")) {
    const std::string e = str("estimator");
    if (e == "ipw") {
      cfg.estimator = Estimator::kIpw;
    } else if (e == "dr") {
      cfg.estimator = Estimator::kDr;
    } else {
      throw InvalidInput("config: field 'estimator': expected 'ipw' or 'dr'");
    }
  }
  if (j.contains("samples_path")) {
    cfg.samples_path = str("samples_path");
  }
  if (j.contains("observations_path")) {
    cfg.observations_path = str("observations_path");
  }
  if (j.contains("trunc_c") && !j.at("trunc_c").is_null()) {
    cfg.trunc_c = detail::get_number(j.at("trunc_c"), "trunc_c");
  }
  if (j.contains("bootstrap")) {
    const json& b = detail::require_object(j.at("bootstrap"), "bootstrap");
    detail::reject_unknown(b, {"n_boot", "confidence"}, "bootstrap.");
    if (b.contains("n_boot")) {
      cfg.bootstrap.n_boot = static_cast<int>(num(b, "n_boot", "bootstrap.n_boot"));
    }
    if (b.contains("confidence")) {
      cfg.bootstrap.confidence = num(b, "confidence", "bootstrap.confidence");
    }
  }
  for (const auto& [key, target] : {std::pair{"delta_sutva", &cfg.delta_sutva}, std::pair{"y_sup", &cfg.y_sup},
                                    std::pair{"tail_kappa", &cfg.tail_kappa}}) {
    if (j.contains(key) && !j.at(key).is_null()) {
      *target = detail::get_number(j.at(key), key);
    }
  }
  if (j.contains("min_ess")) {
    cfg.min_ess = detail::get_number(j.at("min_ess"), "min_ess");
  }
  if (j.contains("dgp")) {
    const json& d = detail::require_object(j.at("dgp"), "dgp");
    detail::reject_unknown(d, {"mu", "sigma2", "lam_noise", "tau", "delta", "eps_shift", "interaction_corr", "n",
                               "n_clusters"},
                           "dgp.");
    if (d.contains("mu")) cfg.dgp.mu = num(d, "mu", "dgp.mu");
    if (d.contains("sigma2")) cfg.dgp.sigma2 = num(d, "sigma2", "dgp.sigma2");
    if (d.contains("eps_shift")) cfg.dgp.eps_shift = num(d, "eps_shift", "dgp.eps_shift");
    if (d.contains("interaction_corr")) cfg.dgp.interaction_corr = num(d, "interaction_corr", "dgp.interaction_corr");
    if (d.contains("n")) cfg.dgp.n = static_cast<std::size_t>(num(d, "n", "dgp.n"));
    if (d.contains("n_clusters")) cfg.dgp.n_clusters = static_cast<std::size_t>(num(d, "n_clusters", "dgp.n_clusters"));
    const bool has_ratio = d.contains("tau") || d.contains("delta");
    if (has_ratio && d.contains("lam_noise")) {
      throw InvalidInput("config: give either 'dgp.lam_noise' or 'dgp.tau' with 'dgp.delta', not both");
    }
    if (d.contains("lam_noise")) {
      cfg.dgp.lam_noise = num(d, "lam_noise", "dgp.lam_noise");
    } else if (has_ratio) {
      // Latency parameter taken as the ratio τ/Δ.
      const double tau = detail::get_number(detail::at(d, "tau", "dgp."), "dgp.tau");
      const double delta = detail::get_number(detail::at(d, "delta", "dgp."), "dgp.delta");
      if (!(delta > 0.0) || !(tau >= 0.0)) {
        throw InvalidInput("config: field 'dgp.delta' must be positive and 'dgp.tau' nonnegative");
      }
      cfg.dgp.lam_noise = tau / delta;
    }
    try {
      cfg.dgp.validate();
    } catch (const InvalidInput& e) {
      throw InvalidInput(std::string("config: ") + e.what());
    }
  }
  if (j.contains("toy")) {
    const json& t = detail::require_object(j.at("toy"), "toy");
    detail::reject_unknown(t, {"sigma2", "rho_toy", "lam_grid", "eps_list"}, "toy.");
    if (t.contains("sigma2")) cfg.toy.sigma2 = num(t, "sigma2", "toy.sigma2");
    if (t.contains("rho_toy")) cfg.toy.rho_toy = num(t, "rho_toy", "toy.rho_toy");
    if (t.contains("lam_grid")) {
      const json& g = detail::require_object(t.at("lam_grid"), "toy.lam_grid");
      detail::reject_unknown(g, {"start", "stop", "points"}, "toy.lam_grid.");
      if (g.contains("start")) cfg.toy.lam_start = num(g, "start", "toy.lam_grid.start");
      if (g.contains("stop")) cfg.toy.lam_stop = num(g, "stop", "toy.lam_grid.stop");
      if (g.contains("points")) cfg.toy.lam_points = static_cast<int>(num(g, "points", "toy.lam_grid.points"));
    }
    if (t.contains("eps_list")) {
      const Eigen::VectorXd e = detail::get_vector(t.at("eps_list"), "toy.eps_list");
      cfg.toy.eps_list.assign(e.data(), e.data() + e.size());
    }
    try {
      cfg.toy.validate();
    } catch (const InvalidInput& e) {
      throw InvalidInput(std::string("config: ") + e.what());
    }
  }
  if (j.contains("output")) {
    const json& o = detail::require_object(j.at("output"), "output");
    detail::reject_unknown(o, {"dir", "format"}, "output.");
    if (o.contains("dir")) cfg.output_dir = o.at("dir").get<std::string>();
    if (o.contains("format")) cfg.output_format = o.at("format").get<std::string>();
  }
  if (cfg.output_format != "json" && cfg.output_format != "csv") {
    throw InvalidInput("config: field 'output.format': expected 'json' or 'csv'");
  }
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw InvalidInput("config: cannot open '" + path + "'");
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace bregdecomp::harness

#endif  // BREGDECOMP_HARNESS_CONFIG_HPP
