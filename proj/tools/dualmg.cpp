// SPDX-FileCopyrightText: Copyright (c) 2026 The dualmg Authors
// SPDX-License-Identifier: Apache-2.0

// Experiment driver: `dualmg run` executes one configuration (an alpha sweep),
// `dualmg summarize` tabulates the JSON summaries it wrote.

#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dualmg/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Dual mixed elasticity multigrid experiments"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run one experiment configuration");
  std::string config_path;
  std::optional<std::string> problem, mode, bc, lambda, out, name;
  std::optional<int> refine, cells, max_cycles, sweeps;
  std::optional<double> tol;
  std::vector<std::string> alphas;
  run->add_option("--config", config_path, "flat key = value configuration file")->check(CLI::ExistingFile);
  run->add_option("--problem", problem, "cook | face | dual_poisson | manufactured");
  run->add_option("--mode", mode, "smooth_only | vcycle | two_grid | direct");
  run->add_option("--alpha", alphas, "Robin parameter(s); repeat or comma-separate")->delimiter(',');
  run->add_option("--refine", refine, "number of uniform refinements of the coarse mesh");
  run->add_option("--cells", cells, "cells per side of the coarse grid");
  run->add_option("--bc", bc, "neumann_remove_rbm | neumann_zero_average | dirichlet | robin");
  run->add_option("--lambda", lambda, "second Lame parameter (number or inf)");
  run->add_option("--tol", tol, "relative residual tolerance");
  run->add_option("--max-cycles", max_cycles, "cycle limit");
  run->add_option("--sweeps", sweeps, "sweeps for smooth_only");
  run->add_option("--out", out, "output directory");
  run->add_option("--name", name, "base name of the output files");

  auto* summarize = app.add_subcommand("summarize", "tabulate run summaries");
  std::vector<std::filesystem::path> summaries;
  bool csv = false;
  summarize->add_option("summaries", summaries, "JSON summaries written by run")->required()->check(CLI::ExistingFile);
  summarize->add_flag("--csv", csv, "comma separated output");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*summarize) {
      std::cout << dualmg::summarize_files(summaries, csv);
      return 0;
    }

    dualmg::RunConfig config;
    if (!config_path.empty()) config = dualmg::load_config(config_path);
    auto set = [&config](const std::string& key, const auto& value) {
      if (value) {
        std::ostringstream s;
        s << std::setprecision(17) << *value;
        dualmg::set_config_value(config, key, s.str());
      }
    };
    set("problem", problem);
    set("mode", mode);
    set("refinements", refine);
    set("cells", cells);
    set("bc", bc);
    set("lambda", lambda);
    set("tol", tol);
    set("max_cycles", max_cycles);
    set("sweeps", sweeps);
    set("out", out);
    set("name", name);
    if (!alphas.empty()) {
      std::string joined;
      for (const auto& a : alphas) joined += a + " ";
      dualmg::set_config_value(config, "alpha", joined);
    }

    const auto results = dualmg::run(config);
    std::vector<nlohmann::json> rows;
    for (const auto& r : results) rows.push_back(r.summary(config));
    std::cout << dualmg::summarize(rows);
    std::cout << "results written to " << config.out.string() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
