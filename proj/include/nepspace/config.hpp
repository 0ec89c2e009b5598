// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <json.hpp>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "nepspace/errors.hpp"
#include "nepspace/nep.hpp"
#include "nepspace/rep.hpp"
#include "nepspace/solver_detail.hpp"

namespace nepspace {

using Json = nlohmann::json;

enum class ProblemKind { RationalStateSpace, RationalPartialFraction, SplitForm };

/// Parsed run configuration. Matrices are loaded lazily via load_problem so
/// that schema errors surface before any file I/O.
struct RunConfig {
  ProblemKind kind = ProblemKind::RationalStateSpace;
  Json problem;  // raw problem section (paths resolved against base_dir)
  std::filesystem::path base_dir;

  Complex target{0, 0};
  int num_eigs = 1;
  Strategy strategy = Strategy::All;
  SolveOptions options;
  double oracle_radius = 1.0;

  Json echo;  // the original document, reproduced in result.json
};

namespace config_detail {

inline Complex parse_complex(const Json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ConfigError(field, "expected a complex number as [re, im]");
  return Complex(j[0].get<double>(), j[1].get<double>());
}

inline DenseVec parse_coeffs(const Json& j, const std::string& field) {
  if (!j.is_array() || j.empty())
    throw ConfigError(field, "expected a non-empty array of [re, im] pairs");
  DenseVec out(j.size());
  for (std::size_t i = 0; i < j.size(); ++i)
    out(static_cast<Index>(i)) =
        parse_complex(j[i], field + "[" + std::to_string(i) + "]");
  return out;
}

template <typename T>
T get_number(const Json& j, const std::string& field, T fallback,
             bool required = false) {
  if (!j.contains(field)) {
    if (required) throw ConfigError(field, "missing required field");
    return fallback;
  }
  if (!j[field].is_number())
    throw ConfigError(field, "expected a number");
  return j[field].get<T>();
}

inline std::string get_string(const Json& j, const std::string& field,
                              const std::string& fallback,
                              bool required = false) {
  if (!j.contains(field)) {
    if (required) throw ConfigError(field, "missing required field");
    return fallback;
  }
  if (!j[field].is_string()) throw ConfigError(field, "expected a string");
  return j[field].get<std::string>();
}

inline ScalarFn parse_fn(const Json& j, const std::string& field) {
  if (!j.is_object()) throw ConfigError(field, "expected an object");
  std::string kind = get_string(j, "kind", "", true);
  try {
    if (kind == "constant")
      return ScalarFn::constant(parse_complex(j.at("value"), field + ".value"));
    if (kind == "monomial") {
      if (!j.contains("power") || !j["power"].is_number_integer())
        throw ConfigError(field + ".power", "expected an integer");
      return ScalarFn::monomial(j["power"].get<int>());
    }
    if (kind == "exponential")
      return ScalarFn::exponential(
          parse_complex(j.at("alpha"), field + ".alpha"));
    if (kind == "sqrt")
      return ScalarFn::sqrt_branch(
          parse_complex(j.at("sigma"), field + ".sigma"));
    if (kind == "rational")
      return ScalarFn::rational(parse_coeffs(j.at("num"), field + ".num"),
                                parse_coeffs(j.at("den"), field + ".den"));
  } catch (const Json::exception&) {
    throw ConfigError(field, "missing parameters for kind '" + kind + "'");
  } catch (const Error& e) {
    throw ConfigError(field, e.what());
  }
  throw ConfigError(field + ".kind",
                    "unknown function kind '" + kind +
                        "' (expected constant, monomial, exponential, sqrt "
                        "or rational)");
}

}  // namespace config_detail

inline RunConfig parse_config(const Json& doc,
                              const std::filesystem::path& base_dir) {
  using namespace config_detail;
  if (!doc.is_object()) throw ConfigError("", "config must be a JSON object");
  RunConfig cfg;
  cfg.echo = doc;
  cfg.base_dir = base_dir;

  if (!doc.contains("problem") || !doc["problem"].is_object())
    throw ConfigError("problem", "missing required object");
  cfg.problem = doc["problem"];
  std::string kind = get_string(cfg.problem, "kind", "", true);
  if (kind == "rational-statespace")
    cfg.kind = ProblemKind::RationalStateSpace;
  else if (kind == "rational-partialfraction")
    cfg.kind = ProblemKind::RationalPartialFraction;
  else if (kind == "split-nep")
    cfg.kind = ProblemKind::SplitForm;
  else
    throw ConfigError("problem.kind", "unknown kind '" + kind + "'");

  if (!doc.contains("target"))
    throw ConfigError("target", "missing required field");
  cfg.target = parse_complex(doc["target"], "target");

  cfg.num_eigs = get_number<int>(doc, "num_eigs", 1);
  if (cfg.num_eigs < 1) throw ConfigError("num_eigs", "must be >= 1");

  cfg.strategy = parse_strategy(get_string(doc, "strategy", "ALL"));
  cfg.options.mode = parse_mode(get_string(doc, "mode", "two-sided"));
  cfg.options.q = get_number<int>(doc, "q", 0);
  if (doc.contains("q")) {
    int min_q = cfg.options.mode == Mode::TwoSided ? 2 : 3;
    if (cfg.options.q < min_q)
      throw ConfigError("q", "must be >= " + std::to_string(min_q) + " for " +
                                 to_string(cfg.options.mode) + " mode");
  }
  cfg.options.partition = get_number<int>(doc, "m", 2);
  if (cfg.options.partition < 1) throw ConfigError("m", "must be >= 1");
  cfg.options.tol = get_number<double>(doc, "tol", 1e-8);
  if (!(cfg.options.tol > 0)) throw ConfigError("tol", "must be > 0");
  cfg.options.max_iter = get_number<int>(doc, "max_iter", 30);
  if (cfg.options.max_iter < 1) throw ConfigError("max_iter", "must be >= 1");
  cfg.options.seed = get_number<std::uint64_t>(doc, "seed", 0);

  if (doc.contains("init")) {
    const Json& init = doc["init"];
    if (!init.is_object()) throw ConfigError("init", "expected an object");
    if (init.contains("points")) {
      if (!init["points"].is_array())
        throw ConfigError("init.points", "expected an array");
      for (std::size_t i = 0; i < init["points"].size(); ++i)
        cfg.options.init_points.push_back(parse_complex(
            init["points"][i], "init.points[" + std::to_string(i) + "]"));
    }
    if (init.contains("auto_radius")) {
      cfg.options.init_radius =
          get_number<double>(init, "auto_radius", -1.0);
      if (!(cfg.options.init_radius > 0))
        throw ConfigError("init.auto_radius", "must be > 0");
    }
  }

  cfg.oracle_radius = std::max(1.0, std::abs(cfg.target));
  if (doc.contains("oracle")) {
    if (!doc["oracle"].is_object())
      throw ConfigError("oracle", "expected an object");
    cfg.oracle_radius = get_number<double>(doc["oracle"], "region_radius",
                                           cfg.oracle_radius);
    if (!(cfg.oracle_radius > 0))
      throw ConfigError("oracle.region_radius", "must be > 0");
  }
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file: " + path);
  Json doc;
  try {
    in >> doc;
  } catch (const Json::exception& e) {
    throw Error("config parse failure in " + path + ": " + e.what());
  }
  return parse_config(doc, std::filesystem::path(path).parent_path());
}

using Problem = std::variant<StateSpaceRep, SplitNep>;

inline SparseMat load_matrix(const RunConfig& cfg, const std::string& field) {
  std::string rel = config_detail::get_string(cfg.problem, field, "", true);
  std::filesystem::path path = cfg.base_dir / rel;
  if (!std::filesystem::exists(path))
    throw ConfigError("problem." + field,
                      "referenced file does not exist: " + path.string());
  return read_matrix_market(path.string());
}

inline Problem load_problem(const RunConfig& cfg) {
  using namespace config_detail;
  switch (cfg.kind) {
    case ProblemKind::RationalStateSpace: {
      SparseMat a = load_matrix(cfg, "A");
      DenseMat b = to_dense(load_matrix(cfg, "B"));
      DenseMat c = to_dense(load_matrix(cfg, "C"));
      std::vector<DenseMat> poly;
      if (cfg.problem.contains("P")) {
        if (!cfg.problem["P"].is_array())
          throw ConfigError("problem.P", "expected an array of file paths");
        for (std::size_t i = 0; i < cfg.problem["P"].size(); ++i) {
          std::filesystem::path path =
              cfg.base_dir / cfg.problem["P"][i].get<std::string>();
          if (!std::filesystem::exists(path))
            throw ConfigError("problem.P[" + std::to_string(i) + "]",
                              "referenced file does not exist: " +
                                  path.string());
          poly.push_back(to_dense(read_matrix_market(path.string())));
        }
      }
      try {
        return StateSpaceRep(std::move(poly), std::move(a), std::move(b),
                             std::move(c));
      } catch (const Error& e) {
        throw ConfigError("problem", e.what());
      }
    }
    case ProblemKind::RationalPartialFraction: {
      if (!cfg.problem.contains("terms") || !cfg.problem["terms"].is_array() ||
          cfg.problem["terms"].empty())
        throw ConfigError("problem.terms", "expected a non-empty array");
      PartialFractionRep pf;
      for (std::size_t i = 0; i < cfg.problem["terms"].size(); ++i) {
        const Json& jt = cfg.problem["terms"][i];
        std::string field = "problem.terms[" + std::to_string(i) + "]";
        PartialFractionTerm term;
        try {
          term.p = parse_coeffs(jt.at("p"), field + ".p");
          term.d = parse_coeffs(jt.at("d"), field + ".d");
          std::filesystem::path lp = cfg.base_dir / jt.at("L").get<std::string>();
          std::filesystem::path up = cfg.base_dir / jt.at("U").get<std::string>();
          term.l = to_dense(read_matrix_market(lp.string()));
          term.u = to_dense(read_matrix_market(up.string()));
        } catch (const Json::exception&) {
          throw ConfigError(field, "requires p, d, L, U");
        }
        pf.terms.push_back(std::move(term));
      }
      if (cfg.problem.contains("P"))
        for (const auto& p : cfg.problem["P"])
          pf.poly.push_back(to_dense(read_matrix_market(
              (cfg.base_dir / p.get<std::string>()).string())));
      try {
        return realize(pf);
      } catch (const Error& e) {
        throw ConfigError("problem.terms", e.what());
      }
    }
    case ProblemKind::SplitForm: {
      if (!cfg.problem.contains("terms") || !cfg.problem["terms"].is_array() ||
          cfg.problem["terms"].empty())
        throw ConfigError("problem.terms", "expected a non-empty array");
      std::vector<SplitTerm> terms;
      for (std::size_t i = 0; i < cfg.problem["terms"].size(); ++i) {
        const Json& jt = cfg.problem["terms"][i];
        std::string field = "problem.terms[" + std::to_string(i) + "]";
        ScalarFn fn = parse_fn(jt.contains("fn") ? jt["fn"] : Json(),
                               field + ".fn");
        if (!jt.contains("T") || !jt["T"].is_string())
          throw ConfigError(field + ".T", "expected a file path");
        std::filesystem::path path = cfg.base_dir / jt["T"].get<std::string>();
        if (!std::filesystem::exists(path))
          throw ConfigError(field + ".T", "referenced file does not exist: " +
                                              path.string());
        terms.push_back({fn, read_matrix_market(path.string())});
      }
      try {
        return SplitNep(std::move(terms));
      } catch (const Error& e) {
        throw ConfigError("problem.terms", e.what());
      }
    }
  }
  throw ConfigError("problem.kind", "unhandled kind");
}

}  // namespace nepspace
