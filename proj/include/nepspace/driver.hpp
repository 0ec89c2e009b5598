// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "nepspace/config.hpp"
#include "nepspace/generators.hpp"
#include "nepspace/nep_solver.hpp"
#include "nepspace/oracle.hpp"
#include "nepspace/rep_solver.hpp"
#include "nepspace/version.hpp"

namespace nepspace {

namespace driver_detail {

inline Json complex_json(Complex z) { return Json::array({z.real(), z.imag()}); }

inline Json report_json(const SolveReport& report, const RunConfig& cfg) {
  Json out;
  out["converged"] = report.converged;
  out["iterations"] = report.iterations_used;
  Json eigs = Json::array();
  for (const auto& est : report.eigenvalues) {
    Json e;
    e["lambda"] = complex_json(est.lambda);
    e["residual"] = est.residual;
    e["converged"] = est.converged;
    eigs.push_back(std::move(e));
  }
  out["eigenvalues"] = std::move(eigs);
  out["counts"] = {{"factorizations", report.total_factorizations},
                   {"block_solves", report.total_solves},
                   {"adjoint_block_solves", report.total_adjoint_solves}};
  Json iters = Json::array();
  for (const auto& rec : report.iterations) {
    Json points = Json::array();
    for (Complex p : rec.interp_points) points.push_back(complex_json(p));
    iters.push_back({{"iter", rec.iter},
                     {"interp_points", std::move(points)},
                     {"subspace_dim", rec.subspace_dim}});
  }
  out["iteration_interp_points"] = std::move(iters);
  out["notes"] = report.notes;
  out["config"] = cfg.echo;
  out["versions"] = {{"nepspace", kVersion},
                     {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                   std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                   std::to_string(EIGEN_MINOR_VERSION)}};
  return out;
}

/// Writes via a temp file and rename, so a crash never leaves truncated
/// output behind.
inline void write_file_atomic(const std::filesystem::path& path,
                              const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw Error("cannot open for writing: " + tmp.string());
    out << content;
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace driver_detail

/// Solves the configured problem and writes iterations.csv plus result.json
/// into out_dir. Exit code 0 on convergence, 2 when max_iter was exhausted,
/// 1 on configuration or solver errors.
inline int run(const std::string& config_path, const std::string& out_dir) {
  SolveReport report;
  RunConfig cfg;
  try {
    cfg = load_config(config_path);
    Problem problem = load_problem(cfg);
    if (std::holds_alternative<StateSpaceRep>(problem)) {
      report = solve_rep(std::get<StateSpaceRep>(problem), cfg.target,
                         cfg.num_eigs, cfg.strategy, cfg.options);
    } else {
      report = solve_nep(std::get<SplitNep>(problem), cfg.target, cfg.num_eigs,
                         cfg.strategy, cfg.options);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    std::filesystem::create_directories(out_dir);
    std::ostringstream csv;
    write_iterations_csv(report, csv);
    driver_detail::write_file_atomic(
        std::filesystem::path(out_dir) / "iterations.csv", csv.str());
    Json result = driver_detail::report_json(report, cfg);
    driver_detail::write_file_atomic(
        std::filesystem::path(out_dir) / "result.json", result.dump(2) + "\n");
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return report.converged ? 0 : 2;
}

struct GenerateParams {
  std::string kind;  // banded | delay | quadratic
  Index size = 100;
  Index bandwidth = 5;
  Index n_io = 2;
  double density = 0.05;
  double g_scale = 0.1;
  std::uint64_t seed = 0;
  Complex target{0, 0};
};

/// Writes a synthetic problem (Matrix Market files plus a ready-to-run
/// config.json) into out_dir.
inline int run_generate(const GenerateParams& params,
                        const std::string& out_dir) {
  try {
    std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    Json cfg;
    cfg["target"] = driver_detail::complex_json(params.target);
    cfg["num_eigs"] = 1;
    cfg["strategy"] = "ALL";
    cfg["mode"] = "two-sided";
    cfg["tol"] = 1e-8;
    cfg["max_iter"] = 30;
    cfg["seed"] = params.seed;

    if (params.kind == "banded") {
      StateSpaceRep sys = generate_banded(params.size, params.bandwidth,
                                          params.n_io, params.seed);
      write_matrix_market((dir / "A.mtx").string(), sys.a());
      write_matrix_market((dir / "B.mtx").string(), sys.b());
      write_matrix_market((dir / "C.mtx").string(), sys.c());
      cfg["problem"] = {{"kind", "rational-statespace"},
                        {"A", "A.mtx"},
                        {"B", "B.mtx"},
                        {"C", "C.mtx"}};
    } else if (params.kind == "delay") {
      SplitNep nep = generate_delay(params.size, params.density,
                                    params.g_scale, params.seed);
      write_matrix_market((dir / "F.mtx").string(), nep.terms()[0].t);
      write_matrix_market((dir / "I.mtx").string(), nep.terms()[1].t);
      write_matrix_market((dir / "G.mtx").string(), nep.terms()[2].t);
      cfg["problem"] = {
          {"kind", "split-nep"},
          {"terms",
           Json::array(
               {{{"fn", {{"kind", "constant"}, {"value", {1.0, 0.0}}}},
                 {"T", "F.mtx"}},
                {{"fn", {{"kind", "monomial"}, {"power", 1}}},
                 {"T", "I.mtx"}},
                {{"fn", {{"kind", "exponential"}, {"alpha", {-2.0, 0.0}}}},
                 {"T", "G.mtx"}}})}};
      cfg["m"] = 2;
    } else if (params.kind == "quadratic") {
      SplitNep nep = generate_quadratic(params.size, params.density,
                                        params.seed);
      Json terms = Json::array();
      for (int p = 0; p <= 2; ++p) {
        std::string name = "P" + std::to_string(p) + ".mtx";
        write_matrix_market((dir / name).string(), nep.terms()[p].t);
        terms.push_back(
            {{"fn", {{"kind", "monomial"}, {"power", p}}}, {"T", name}});
      }
      cfg["problem"] = {{"kind", "split-nep"}, {"terms", std::move(terms)}};
      cfg["m"] = 2;
    } else {
      std::cerr << "error: unknown generator kind '" << params.kind << "'\n";
      return 1;
    }
    driver_detail::write_file_atomic(dir / "config.json", cfg.dump(2) + "\n");
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

/// Runs the desk-scale dense oracle on the configured problem and prints the
/// eigenvalues as JSON.
inline int run_oracle(const std::string& config_path, std::ostream& out) {
  try {
    RunConfig cfg = load_config(config_path);
    Problem problem = load_problem(cfg);
    std::vector<Complex> values;
    if (std::holds_alternative<StateSpaceRep>(problem)) {
      values = oracle_rep(std::get<StateSpaceRep>(problem), cfg.target,
                          cfg.num_eigs);
    } else {
      values = oracle_nep(std::get<SplitNep>(problem), cfg.target,
                          cfg.num_eigs, cfg.oracle_radius);
    }
    Json doc;
    Json eigs = Json::array();
    for (Complex v : values) eigs.push_back(driver_detail::complex_json(v));
    doc["eigenvalues"] = std::move(eigs);
    doc["target"] = driver_detail::complex_json(cfg.target);
    out << doc.dump(2) << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace nepspace
