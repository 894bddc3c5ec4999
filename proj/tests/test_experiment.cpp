// SPDX-FileCopyrightText: Copyright (c) 2026 The dualmg Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dualmg/experiment.hpp"

using namespace dualmg;

namespace {

std::string csv_of(const RunResult& r) {
  std::ostringstream s;
  write_csv(s, r.log);
  return s.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("dualmg_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("config defaults") {
  const RunConfig c;
  CHECK(c.alphas == std::vector<double>{0, 0.01, 0.1, 1, 10, 100});
  CHECK(c.pre_smooth == 5);
  CHECK(c.post_smooth == 5);
  CHECK(c.sweeps == 100);
  CHECK(c.tol == 1e-8);
  CHECK(c.seed == 0);
}

TEST_CASE("config parsing") {
  std::istringstream in(R"(# two-grid study
problem = face
mode = two_grid      # composite transfer
refinements = 3
alpha = 0, 0.1 1
bc = robin
pre = 3
post = 4
tol = 1e-6
max_cycles = 100
seed = 42
lambda = inf
out = somewhere
name = study
)");
  const RunConfig c = parse_config(in);
  CHECK(c.problem == ProblemKind::Face);
  CHECK(c.mode == RunMode::TwoGrid);
  CHECK(c.refinements == 3);
  CHECK(c.alphas == std::vector<double>{0, 0.1, 1});
  CHECK(c.bc == LocalBc::Robin);
  CHECK(c.pre_smooth == 3);
  CHECK(c.post_smooth == 4);
  CHECK(c.tol == 1e-6);
  CHECK(c.max_cycles == 100);
  CHECK(c.seed == 42);
  CHECK(c.lambda == "inf");
  CHECK(c.out == "somewhere");
  CHECK(c.run_name(0.1) == "study_alpha0.1");
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("config errors") {
  std::istringstream unknown("colour = blue\n");
  CHECK_THROWS_AS(parse_config(unknown), Error);
  std::istringstream no_equals("problem cook\n");
  CHECK_THROWS_AS(parse_config(no_equals), Error);
  std::istringstream bad_number("refinements = two\n");
  CHECK_THROWS_AS(parse_config(bad_number), Error);
  std::istringstream bad_problem("problem = bridge\n");
  CHECK_THROWS_AS(parse_config(bad_problem), Error);
  CHECK_THROWS_AS(load_config("/nonexistent/dualmg.cfg"), Error);

  RunConfig c;
  c.alphas.clear();
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.refinements = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c.mode = RunMode::SmoothOnly;
  CHECK_NOTHROW(c.validate());
  c = {};
  c.problem = ProblemKind::DualPoisson;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.problem = ProblemKind::Manufactured;
  c.lambda = "inf";
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.alphas = {-1};
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("name round trips") {
  for (auto k : {ProblemKind::Cook, ProblemKind::Face, ProblemKind::DualPoisson, ProblemKind::Manufactured}) {
    CHECK(problem_kind_from_string(to_string(k)) == k);
  }
  for (auto m : {RunMode::SmoothOnly, RunMode::VCycle, RunMode::TwoGrid, RunMode::Direct}) {
    CHECK(run_mode_from_string(to_string(m)) == m);
  }
}

TEST_CASE("dual Poisson with alpha = 0 is the Dirichlet system") {
  RunConfig c;
  c.problem = ProblemKind::DualPoisson;
  c.mode = RunMode::Direct;
  c.refinements = 1;
  const RunResult zero = run_single(c, 0);
  CHECK(zero.summary(c).at("robin_equals_dirichlet").get<bool>());
  CHECK(zero.converged);
  CHECK(zero.log.back().res <= 1e-10 * zero.log.front().res);
  CHECK_FALSE(run_single(c, 1).summary(c).at("robin_equals_dirichlet").get<bool>());
}

TEST_CASE("csv logs are reproducible") {
  RunConfig c;
  c.problem = ProblemKind::Cook;
  c.mode = RunMode::SmoothOnly;
  c.refinements = 0;
  c.sweeps = 10;
  c.tol = 0;
  const std::string a = csv_of(run_single(c, 1));
  const std::string b = csv_of(run_single(c, 1));
  CHECK(a == b);
  const auto rows = lines(a);
  REQUIRE(rows.size() == 12);
  CHECK(rows[0] == "cycle,event,res,res_a,res_b");
  CHECK(rows[1].rfind("0,init,", 0) == 0);
  CHECK(rows[11].rfind("10,sweep,", 0) == 0);

  c.seed = 7;
  const std::string r1 = csv_of(run_single(c, 1));
  CHECK(r1 == csv_of(run_single(c, 1)));
  CHECK(r1 != a);
}

TEST_CASE("V-cycle runs report per-level sizes") {
  RunConfig c;
  c.problem = ProblemKind::Manufactured;
  c.mode = RunMode::VCycle;
  c.refinements = 2;
  c.lambda = "1";
  const RunResult r = run_single(c, 1);
  REQUIRE(r.dofs_per_level.size() == 3);
  CHECK(r.dofs_per_level[0] < r.dofs_per_level[1]);
  CHECK(r.converged);
  CHECK(r.iterations > 0);
  CHECK(r.contraction < 1);
  const auto j = r.summary(c);
  CHECK(j.at("iterations").get<int>() == r.iterations);
  CHECK(j.at("dofs_per_level").size() == 3);
}

TEST_CASE("direct manufactured runs report the stress error") {
  RunConfig c;
  c.problem = ProblemKind::Manufactured;
  c.mode = RunMode::Direct;
  c.refinements = 1;
  c.lambda = "1";
  const RunResult r = run_single(c, 0);
  CHECK(r.converged);
  CHECK(r.extra.at("stress_l2_error").get<double>() > 0);
}

TEST_CASE("run writes one csv and one json per alpha") {
  RunConfig c;
  c.problem = ProblemKind::DualPoisson;
  c.mode = RunMode::Direct;
  c.refinements = 0;
  c.alphas = {0, 1, 10};
  c.out = scratch_dir("run");
  c.name = "dp";
  const auto results = run(c);
  REQUIRE(results.size() == 3);
  std::vector<std::filesystem::path> jsons;
  for (double a : c.alphas) {
    CHECK(std::filesystem::exists(c.out / (c.run_name(a) + ".csv")));
    jsons.push_back(c.out / (c.run_name(a) + ".json"));
    CHECK(std::filesystem::exists(jsons.back()));
  }
  const auto table = lines(summarize_files(jsons));
  REQUIRE(table.size() == 4);
  CHECK(table[0].rfind("problem", 0) == 0);
  CHECK(table[1].find("dual_poisson") != std::string::npos);

  const auto csv = lines(summarize_files(jsons, true));
  CHECK(csv[0] == "problem,mode,alpha,dofs,iterations,contraction,converged");
  CHECK(csv[3].rfind("dual_poisson,direct,10,", 0) == 0);
  std::filesystem::remove_all(c.out);
}

TEST_CASE("summaries") {
  RunConfig c;
  c.problem = ProblemKind::DualPoisson;
  c.mode = RunMode::Direct;
  c.refinements = 0;
  const nlohmann::json s = run_single(c, 0).summary(c);
  CHECK(lines(summarize({s})).size() == 2);
  const auto dup = lines(summarize({s, s}));
  REQUIRE(dup.size() == 3);
  CHECK(dup[1] == dup[2]);
  CHECK_THROWS_AS(summarize_files({}), Error);
}

TEST_CASE("parallel sweeps match serial ones") {
  RunConfig c;
  c.problem = ProblemKind::Cook;
  c.mode = RunMode::SmoothOnly;
  c.refinements = 0;
  c.sweeps = 5;
  c.alphas = {0, 1, 10};
  c.out = scratch_dir("parallel");
  setenv("DUALMG_THREADS", "1", 1);
  CHECK(sweep_threads(3) == 1);
  const auto serial = run(c);
  setenv("DUALMG_THREADS", "3", 1);
  CHECK(sweep_threads(3) == 3);
  CHECK(sweep_threads(2) == 2);
  const auto parallel = run(c);
  for (std::size_t i = 0; i < serial.size(); ++i) CHECK(csv_of(serial[i]) == csv_of(parallel[i]));
  setenv("DUALMG_THREADS", "many", 1);
  CHECK_THROWS_AS(sweep_threads(3), Error);
  unsetenv("DUALMG_THREADS");
  std::filesystem::remove_all(c.out);
}

TEST_CASE("face two-grid sweep is best at alpha = 0.1") {
  RunConfig c;
  c.problem = ProblemKind::Face;
  c.mode = RunMode::TwoGrid;
  c.refinements = 2;
  c.alphas = {0, 0.01, 0.1, 1};
  double best = 2;
  double best_alpha = -1;
  for (double a : c.alphas) {
    const RunResult r = run_single(c, a);
    MESSAGE("alpha " << a << ": contraction " << r.contraction);
    if (r.converged && r.contraction < best) {
      best = r.contraction;
      best_alpha = a;
    }
  }
  CHECK(best_alpha == 0.1);
}
