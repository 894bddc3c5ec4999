// SPDX-FileCopyrightText: Copyright (c) 2026 The dualmg Authors
// SPDX-License-Identifier: Apache-2.0

#include "dualmg/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>
#include <thread>

#include <Eigen/SparseLU>

#include "dualmg/problems.hpp"

namespace dualmg {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double x = 0;
  try {
    x = std::stod(value, &used);
  } catch (const std::exception&) {
    throw Error("config: '" + key + "' expects a number, got '" + value + "'");
  }
  if (used != value.size()) throw Error("config: '" + key + "' expects a number, got '" + value + "'");
  return x;
}

int parse_int(const std::string& key, const std::string& value) {
  const double x = parse_double(key, value);
  if (x != std::floor(x)) throw Error("config: '" + key + "' expects an integer, got '" + value + "'");
  return static_cast<int>(x);
}

std::vector<double> parse_list(const std::string& key, const std::string& value) {
  std::string s = value;
  std::replace(s.begin(), s.end(), ',', ' ');
  std::istringstream in(s);
  std::vector<double> out;
  std::string item;
  while (in >> item) out.push_back(parse_double(key, item));
  return out;
}

double lambda_value(const std::string& text, double fallback) {
  if (text.empty()) return fallback;
  if (text == "inf" || text == "infinity") return MaterialParams::kIncompressible;
  return parse_double("lambda", text);
}

std::string format_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

nlohmann::json json_number(double x) {
  if (std::isfinite(x)) return x;
  return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
}

VectorXd initial_guess(Index n, std::mt19937_64& rng, bool random) {
  if (!random) return VectorXd::Zero(n);
  std::uniform_real_distribution<double> dist(-1, 1);
  VectorXd v(n);
  for (Index i = 0; i < n; ++i) v(i) = dist(rng);
  return v;
}

Problem make_problem(const RunConfig& config) {
  switch (config.problem) {
    case ProblemKind::Cook:
      return cook_problem(config.refinements, config.cells > 0 ? config.cells : 4);
    case ProblemKind::Face: {
      FaceGeometry geometry;
      if (config.cells > 0) geometry.cells = config.cells;
      return face_problem(config.refinements, geometry);
    }
    case ProblemKind::Manufactured: {
      const MaterialParams mat{config.mu, lambda_value(config.lambda, 1)};
      return manufactured_elasticity(config.refinements, mat, config.cells > 0 ? config.cells : 2);
    }
    case ProblemKind::DualPoisson:
      break;
  }
  throw Error("make_problem: dual_poisson has no elasticity setup");
}

RunResult run_dual_poisson(const RunConfig& config, double alpha) {
  if (config.mode != RunMode::Direct) throw Error("dual_poisson supports only the direct mode");
  const Mesh coarse = unit_square_mesh(config.cells > 0 ? config.cells : 4,
                                       [](const Vec2&) { return BoundaryLabel::Neumann; });
  const MeshHierarchy meshes = build_hierarchy_meshes(coarse, config.refinements);
  const DualPoissonSystem sys = dual_poisson_robin(meshes.meshes.back(), alpha);

  const SpMat K = sys.robin_saddle();
  Eigen::SparseLU<SpMat> lu(K);
  if (lu.info() != Eigen::Success) throw Error("dual_poisson: factorisation failed");
  const VectorXd b = sys.rhs();
  const VectorXd x = lu.solve(b);
  const SpMat diff = K - sys.dirichlet_saddle();

  RunResult result;
  result.alpha = alpha;
  result.dofs_per_level = {sys.n() + sys.m()};
  result.iterations = 0;
  result.converged = true;
  result.log.push_back({0, LogEvent::Initial, b.norm(), 0, b.norm()});
  const VectorXd r = b - K * x;
  result.log.push_back({1, LogEvent::Post, r.norm(), r.head(sys.n()).norm(), r.tail(sys.m()).norm()});
  result.extra["robin_equals_dirichlet"] = alpha == 0 && diff.norm() == 0;
  result.extra["ext_dofs"] = sys.ext.size();
  return result;
}

}  // namespace

std::string to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::Cook:
      return "cook";
    case ProblemKind::Face:
      return "face";
    case ProblemKind::DualPoisson:
      return "dual_poisson";
    case ProblemKind::Manufactured:
      return "manufactured";
  }
  return "unknown";
}

std::string to_string(RunMode mode) {
  switch (mode) {
    case RunMode::SmoothOnly:
      return "smooth_only";
    case RunMode::VCycle:
      return "vcycle";
    case RunMode::TwoGrid:
      return "two_grid";
    case RunMode::Direct:
      return "direct";
  }
  return "unknown";
}

ProblemKind problem_kind_from_string(const std::string& name) {
  for (auto kind : {ProblemKind::Cook, ProblemKind::Face, ProblemKind::DualPoisson, ProblemKind::Manufactured}) {
    if (to_string(kind) == name) return kind;
  }
  throw Error("unknown problem '" + name + "'");
}

RunMode run_mode_from_string(const std::string& name) {
  for (auto mode : {RunMode::SmoothOnly, RunMode::VCycle, RunMode::TwoGrid, RunMode::Direct}) {
    if (to_string(mode) == name) return mode;
  }
  throw Error("unknown mode '" + name + "'");
}

void RunConfig::validate() const {
  if (alphas.empty()) throw Error("config: the alpha list is empty");
  for (double a : alphas) {
    if (!(a >= 0) || !std::isfinite(a)) throw Error("config: alpha values must be finite and >= 0");
  }
  const int min_refinements = (mode == RunMode::VCycle || mode == RunMode::TwoGrid) ? 1 : 0;
  if (refinements < min_refinements) {
    throw Error("config: mode " + to_string(mode) + " needs refinements >= " + std::to_string(min_refinements));
  }
  if (cells < 0) throw Error("config: cells must be >= 0");
  if (pre_smooth < 0 || post_smooth < 0 || sweeps < 0) throw Error("config: step counts must be >= 0");
  if (max_cycles < 0) throw Error("config: max_cycles must be >= 0");
  if (!(tol >= 0)) throw Error("config: tol must be >= 0");
  if (!(mu > 0)) throw Error("config: mu must be positive");
  if (problem == ProblemKind::DualPoisson && mode != RunMode::Direct) {
    throw Error("config: dual_poisson supports only the direct mode");
  }
  const double lam = lambda_value(lambda, 1);
  if (!(lam >= 0)) throw Error("config: lambda must be >= 0 or inf");
  if (problem == ProblemKind::Manufactured && std::isinf(lam)) {
    throw Error("config: the manufactured problem needs a finite lambda");
  }
}

std::string RunConfig::run_name(double alpha) const {
  std::ostringstream s;
  s << (name.empty() ? to_string(problem) + "_" + to_string(mode) : name) << "_alpha" << alpha;
  return s.str();
}

void set_config_value(RunConfig& config, const std::string& key, const std::string& value) {
  if (key == "problem") {
    config.problem = problem_kind_from_string(value);
  } else if (key == "mode") {
    config.mode = run_mode_from_string(value);
  } else if (key == "refinements" || key == "refine") {
    config.refinements = parse_int(key, value);
  } else if (key == "cells") {
    config.cells = parse_int(key, value);
  } else if (key == "alpha" || key == "alphas") {
    config.alphas = parse_list(key, value);
  } else if (key == "bc") {
    config.bc = local_bc_from_string(value);
  } else if (key == "pre") {
    config.pre_smooth = parse_int(key, value);
  } else if (key == "post") {
    config.post_smooth = parse_int(key, value);
  } else if (key == "sweeps") {
    config.sweeps = parse_int(key, value);
  } else if (key == "tol") {
    config.tol = parse_double(key, value);
  } else if (key == "max_cycles") {
    config.max_cycles = parse_int(key, value);
  } else if (key == "seed") {
    config.seed = static_cast<std::uint64_t>(parse_int(key, value));
  } else if (key == "mu") {
    config.mu = parse_double(key, value);
  } else if (key == "lambda") {
    lambda_value(value, 1);
    config.lambda = value;
  } else if (key == "out") {
    config.out = value;
  } else if (key == "name") {
    config.name = value;
  } else {
    throw Error("config: unknown key '" + key + "'");
  }
}

RunConfig parse_config(std::istream& in, RunConfig base) {
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error("config line " + std::to_string(number) + ": expected key = value");
    set_config_value(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return base;
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file " + path.string());
  return parse_config(in, std::move(base));
}

nlohmann::json RunResult::summary(const RunConfig& config) const {
  nlohmann::json j;
  j["problem"] = to_string(config.problem);
  j["mode"] = to_string(config.mode);
  j["bc"] = to_string(config.bc);
  j["alpha"] = alpha;
  j["mu"] = config.mu;
  j["lambda"] = config.lambda.empty() ? "default" : config.lambda;
  j["refinements"] = config.refinements;
  j["dofs_per_level"] = dofs_per_level;
  j["iterations"] = iterations;
  j["converged"] = converged;
  j["contraction"] = json_number(contraction);
  j["initial_residual"] = log.empty() ? nlohmann::json(0.0) : json_number(log.front().res);
  j["final_residual"] = log.empty() ? nlohmann::json(0.0) : json_number(log.back().res);
  for (const auto& [key, value] : extra.items()) j[key] = value;
  return j;
}

RunResult run_single(const RunConfig& config, double alpha) {
  config.validate();
  if (config.problem == ProblemKind::DualPoisson) return run_dual_poisson(config, alpha);

  Problem problem = make_problem(config);
  MaterialParams material = problem.spec.material;
  material.mu = config.mu;
  material.lambda = lambda_value(config.lambda, material.lambda);
  const SmootherConfig smoother{config.bc, alpha};
  std::mt19937_64 rng(config.seed);
  const bool random = config.seed != 0;

  RunResult result;
  result.alpha = alpha;
  if (config.mode == RunMode::VCycle || config.mode == RunMode::TwoGrid) {
    const Hierarchy hierarchy(problem.coarse(), config.refinements, material, problem.spec.loads, smoother);
    for (int j = 0; j < hierarchy.num_levels(); ++j) result.dofs_per_level.push_back(hierarchy.level(j).size());
    CycleConfig cycle;
    cycle.pre_smooth = config.pre_smooth;
    cycle.post_smooth = config.post_smooth;
    cycle.mode = config.mode == RunMode::VCycle ? CycleMode::VCycle : CycleMode::TwoGrid;
    cycle.tol = config.tol;
    cycle.max_cycles = config.max_cycles;
    const SaddleSystem& fine = hierarchy.fine_system();
    VectorXd y0 = initial_guess(fine.n_free(), rng, random);
    VectorXd z0 = initial_guess(fine.m(), rng, random);
    SolveResult solved = solve(hierarchy, cycle, std::move(y0), std::move(z0));
    result.log = std::move(solved.log);
    result.iterations = solved.cycles;
    result.converged = solved.converged;
    result.contraction = solved.contraction();
    return result;
  }

  const Mesh& mesh = problem.finest();
  const DofLayout layout = build_layout(mesh);
  const SaddleSystem system = assemble(mesh, layout, material, problem.spec.loads);
  result.dofs_per_level = {system.n_free() + system.m()};

  if (config.mode == RunMode::SmoothOnly) {
    const LevelDofs level{&mesh, &layout, &system.full_to_free};
    const PatchSmoother patch_smoother(system.op, level, build_patches(mesh), smoother);
    VectorXd y0 = initial_guess(system.n_free(), rng, random);
    VectorXd z0 = initial_guess(system.m(), rng, random);
    SolveResult solved =
        smooth(system.op, system.f, system.h, patch_smoother, config.sweeps, std::move(y0), std::move(z0), config.tol);
    result.log = std::move(solved.log);
    result.iterations = solved.cycles;
    result.converged = solved.converged;
    result.contraction = solved.contraction();
    return result;
  }

  const VectorXd x = direct_solve(system.op, system.f, system.h);
  const VectorXd y = x.head(system.n_free());
  const VectorXd z = x.tail(system.m());
  const Residuals r0 = residuals(system, VectorXd::Zero(system.n_free()), VectorXd::Zero(system.m()));
  const Residuals r = residuals(system, y, z);
  result.log.push_back({0, LogEvent::Initial, r0.norm, r0.norm_a, r0.norm_b});
  result.log.push_back({1, LogEvent::Post, r.norm, r.norm_a, r.norm_b});
  result.converged = std::isfinite(r.norm) && r.norm <= 1e-8 * std::max(r0.norm, 1e-300);
  if (config.problem == ProblemKind::Manufactured) {
    const auto sol = manufactured_solution(material);
    result.extra["stress_l2_error"] = stress_l2_error(mesh, layout, system.expand_stress(y), sol.stress);
  }
  return result;
}

void write_csv(std::ostream& out, const ResidualLog& log) {
  out << "cycle,event,res,res_a,res_b\n";
  for (const LogEntry& e : log) {
    out << e.cycle << ',' << to_string(e.event) << ',' << format_number(e.res) << ',' << format_number(e.res_a)
        << ',' << format_number(e.res_b) << '\n';
  }
}

int sweep_threads(std::size_t jobs) {
  int threads = 1;
  if (const char* env = std::getenv("DUALMG_THREADS")) {
    try {
      threads = std::max(1, std::stoi(env));
    } catch (const std::exception&) {
      throw Error(std::string("DUALMG_THREADS must be a positive integer, got '") + env + "'");
    }
  }
  return static_cast<int>(std::min<std::size_t>(threads, std::max<std::size_t>(jobs, 1)));
}

std::vector<RunResult> run(const RunConfig& config) {
  config.validate();
  std::vector<RunResult> results(config.alphas.size());
  std::vector<std::exception_ptr> errors(config.alphas.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < config.alphas.size(); i = next++) {
      try {
        results[i] = run_single(config, config.alphas[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    const int threads = sweep_threads(config.alphas.size());
    for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::filesystem::create_directories(config.out);
  for (const RunResult& result : results) {
    const std::string base = config.run_name(result.alpha);
    std::ofstream csv(config.out / (base + ".csv"));
    write_csv(csv, result.log);
    std::ofstream json(config.out / (base + ".json"));
    json << std::setw(2) << result.summary(config) << '\n';
    if (!csv || !json) throw Error("failed to write results for " + base);
  }
  return results;
}

std::string summarize(const std::vector<nlohmann::json>& summaries, bool csv) {
  const std::vector<std::string> header{"problem", "mode", "alpha", "dofs", "iterations", "contraction", "converged"};
  std::vector<std::vector<std::string>> rows;
  for (const auto& s : summaries) {
    const auto& dofs = s.at("dofs_per_level");
    std::ostringstream alpha, contraction;
    alpha << s.at("alpha").get<double>();
    if (s.at("contraction").is_number()) {
      contraction << std::setprecision(4) << s.at("contraction").get<double>();
    } else {
      contraction << s.at("contraction").get<std::string>();
    }
    rows.push_back({s.at("problem").get<std::string>(), s.at("mode").get<std::string>(), alpha.str(),
                    dofs.empty() ? "0" : std::to_string(dofs.back().get<long long>()),
                    std::to_string(s.at("iterations").get<int>()), contraction.str(),
                    s.at("converged").get<bool>() ? "yes" : "no"});
  }

  std::ostringstream out;
  if (csv) {
    auto line = [&out](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
      out << '\n';
    };
    line(header);
    for (const auto& row : rows) line(row);
    return out.str();
  }
  std::vector<std::size_t> width(header.size());
  for (std::size_t i = 0; i < header.size(); ++i) {
    width[i] = header[i].size();
    for (const auto& row : rows) width[i] = std::max(width[i], row[i].size());
  }
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      out << (i ? "  " : "") << std::left << std::setw(static_cast<int>(width[i])) << cells[i];
    }
    out << '\n';
  };
  line(header);
  for (const auto& row : rows) line(row);
  return out.str();
}

std::string summarize_files(const std::vector<std::filesystem::path>& paths, bool csv) {
  if (paths.empty()) throw Error("summarize: no run summaries given");
  std::vector<nlohmann::json> summaries;
  for (const auto& path : paths) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    try {
      summaries.push_back(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
      throw Error("invalid summary " + path.string() + ": " + e.what());
    }
  }
  return summarize(summaries, csv);
}

}  // namespace dualmg
