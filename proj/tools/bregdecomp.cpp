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

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include <bregdecomp/errors.hpp>
#include <bregdecomp/harness/config.hpp>
#include <bregdecomp/harness/pipeline.hpp>

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format;
  std::string input;
};

void add_common(CLI::App& sub, CommonFlags& f, bool takes_input) {
  sub.add_option("--config", f.config, "Run configuration (JSON)");
  sub.add_option("--seed", f.seed, "Random seed (overrides the config)");
  sub.add_option("--out", f.out, "Output directory; the report is printed to stdout when omitted");
  sub.add_option("--format", f.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
  if (takes_input) {
    sub.add_option("--input", f.input, "Input CSV (overrides the config path)");
  }
}

int run(const std::string& mode, const CommonFlags& f) {
  using namespace bregdecomp::harness;
  RunConfig cfg = f.config.empty() ? parse_config("{}") : load_config(f.config);
  const Mode requested = parse_mode(mode);
  if (!f.config.empty() && cfg.echo.contains("mode") && cfg.mode != requested) {
    throw bregdecomp::InvalidInput("config mode '" + std::string(to_string(cfg.mode)) +
                                   "' does not match subcommand '" + mode + "'");
  }
  cfg.mode = requested;
  if (f.seed) {
    cfg.seed = *f.seed;
  }
  if (!f.format.empty()) {
    cfg.output_format = f.format;
  }
  if (!f.out.empty()) {
    cfg.output_dir = f.out;
  }
  if (!f.input.empty()) {
    (requested == Mode::kCalibrate ? cfg.observations_path : cfg.samples_path) = f.input;
  }
  if ((requested == Mode::kEstimate || requested == Mode::kSimulate) && !cfg.convention) {
    std::cerr << "notice: no convention given, using the sequential convention\n";
  }
  const Report rep = run_pipeline(cfg);
  for (const auto& w : rep.warnings) {
    std::cerr << "warning: " << w << '\n';
  }
  if (cfg.output_dir) {
    for (const auto& path : write_report(rep, *cfg.output_dir, cfg.output_format)) {
      std::cerr << "wrote " << path.string() << '\n';
    }
  } else if (cfg.output_format == "csv") {
    for (const auto& [name, contents] : rep.tables) {
      if (rep.tables.size() > 1) {
        std::cout << "# " << name << '\n';
      }
      std::cout << contents;
    }
  } else {
    std::cout << rep.document.dump(2) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bregman regret decomposition toolkit"};
  app.require_subcommand(1);
  CommonFlags flags;
  struct Sub {
    const char* name;
    const char* help;
    bool input;
  };
  for (const Sub& s : {Sub{"gaussian-demo", "Gaussian log-loss curves", false},
                       Sub{"decompose", "Sequential decomposition of a constrained projection", false},
                       Sub{"estimate", "Component estimates from a 2x2 weighted sample", true},
                       Sub{"calibrate", "Monotone penalty surfaces from graded runs", true},
                       Sub{"simulate", "Simulate a 2x2 toggled experiment and estimate it", false}}) {
    add_common(*app.add_subcommand(s.name, s.help), flags, s.input);
  }
  CLI11_PARSE(app, argc, argv);
  try {
    return run(app.get_subcommands().front()->get_name(), flags);
  } catch (const bregdecomp::InvalidInput& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
