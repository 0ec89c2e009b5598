// SPDX-License-Identifier: Apache-2.0
//
// Command-line driver: solve a configured eigenproblem, generate synthetic
// test problems, or run the desk-scale dense oracle for cross-checks.

#include <CLI11.hpp>
#include <iostream>
#include <string>

#include "nepspace/driver.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Interpolatory subspace solver for rational and nonlinear "
               "eigenvalue problems"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  auto* solve = app.add_subcommand(
      "solve", "run the subspace solver on a configured problem");
  solve->add_option("--config", config_path, "run configuration (JSON)")
      ->required();
  solve->add_option("--out", out_dir,
                    "directory for iterations.csv and result.json");

  nepspace::GenerateParams params;
  std::string gen_out = ".";
  std::vector<double> target_pair{0.0, 0.0};
  auto* generate = app.add_subcommand(
      "generate", "write a synthetic problem and a ready-to-run config");
  generate->add_option("--kind", params.kind, "banded | delay | quadratic")
      ->required();
  generate->add_option("--size", params.size, "problem dimension");
  generate->add_option("--bandwidth", params.bandwidth,
                       "band count for the banded generator (odd)");
  generate->add_option("--nio", params.n_io,
                       "input/output count for the banded generator");
  generate->add_option("--density", params.density,
                       "off-diagonal fill for delay/quadratic generators");
  generate->add_option("--gscale", params.g_scale,
                       "scale of the delay term G");
  generate->add_option("--seed", params.seed, "generator seed");
  generate->add_option("--target", target_pair,
                       "target point written into the config (re im)")
      ->expected(2);
  generate->add_option("--out", gen_out, "output directory");

  std::string oracle_config;
  auto* oracle = app.add_subcommand(
      "oracle", "dense reference solve of a configured problem");
  oracle->add_option("--config", oracle_config, "run configuration (JSON)")
      ->required();

  CLI11_PARSE(app, argc, argv);

  if (solve->parsed()) return nepspace::run(config_path, out_dir);
  if (generate->parsed()) {
    params.target = nepspace::Complex(target_pair[0], target_pair[1]);
    return nepspace::run_generate(params, gen_out);
  }
  if (oracle->parsed()) return nepspace::run_oracle(oracle_config, std::cout);
  return 1;
}
