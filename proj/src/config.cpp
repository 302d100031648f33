#include "areal/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace areal {

namespace {

using nlohmann::json;

void require_keys(const json& obj, const std::string& where,
                  const std::set<std::string>& allowed) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (!allowed.count(key))
      throw config_error("config: unknown key '" + where + key + "'");
  }
}

double number_at(const json& obj, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number())
    throw config_error(std::string("config: '") + key + "' must be a number");
  return obj[key].get<double>();
}

Index integer_at(const json& obj, const char* key, Index fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number_integer())
    throw config_error(std::string("config: '") + key +
                       "' must be an integer");
  return obj[key].get<Index>();
}

std::string string_at(const json& obj, const char* key,
                      const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_string())
    throw config_error(std::string("config: '") + key + "' must be a string");
  return obj[key].get<std::string>();
}

}  // namespace

std::string RunConfig::draws_path() const {
  if (!paths.draws.empty()) return paths.draws;
  return paths.output_dir + "/draws." +
         (sampler.format == "binary" ? "bin" : "csv");
}

RunConfig parse_config_text(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw config_error(std::string("config: invalid JSON: ") + e.what());
  }
  if (!root.is_object()) throw config_error("config: root must be an object");
  require_keys(root, "", {"paths", "model", "prior", "sampler", "decision",
                          "simulate", "diagnose"});

  RunConfig cfg;
  if (root.contains("paths")) {
    const json& p = root["paths"];
    require_keys(p, "paths.",
                 {"adjacency", "data", "output_dir", "draws", "truth"});
    cfg.paths.adjacency = string_at(p, "adjacency", "");
    cfg.paths.data = string_at(p, "data", "");
    cfg.paths.output_dir = string_at(p, "output_dir", ".");
    cfg.paths.draws = string_at(p, "draws", "");
    cfg.paths.truth = string_at(p, "truth", "");
  }

  if (root.contains("model")) {
    const json& m = root["model"];
    require_keys(m, "model.", {"alpha", "c", "rho", "pc_bound", "pc_mass"});
    cfg.model.alpha = number_at(m, "alpha", cfg.model.alpha);
    if (m.contains("c")) {
      if (m["c"].is_string()) {
        if (m["c"].get<std::string>() != "auto")
          throw config_error("config: model.c must be a number or \"auto\"");
      } else if (m["c"].is_number()) {
        cfg.model.c = m["c"].get<double>();
      } else {
        throw config_error("config: model.c must be a number or \"auto\"");
      }
    }
    if (m.contains("rho")) {
      if (m["rho"].is_string()) {
        if (m["rho"].get<std::string>() != "pc-prior")
          throw config_error(
              "config: model.rho must be a number or \"pc-prior\"");
      } else if (m["rho"].is_number()) {
        cfg.model.rho = m["rho"].get<double>();
      } else {
        throw config_error(
            "config: model.rho must be a number or \"pc-prior\"");
      }
    }
    cfg.model.pc_bound = number_at(m, "pc_bound", cfg.model.pc_bound);
    cfg.model.pc_mass = number_at(m, "pc_mass", cfg.model.pc_mass);
  }

  if (root.contains("prior")) {
    const json& p = root["prior"];
    require_keys(p, "prior.", {"a_sigma", "b_sigma", "beta_prior"});
    cfg.prior.a_sigma = number_at(p, "a_sigma", cfg.prior.a_sigma);
    cfg.prior.b_sigma = number_at(p, "b_sigma", cfg.prior.b_sigma);
    if (p.contains("beta_prior")) {
      if (p["beta_prior"].is_string()) {
        if (p["beta_prior"].get<std::string>() != "flat")
          throw config_error(
              "config: prior.beta_prior must be \"flat\" or a ridge value");
      } else if (p["beta_prior"].is_number()) {
        cfg.prior.ridge = p["beta_prior"].get<double>();
      } else {
        throw config_error(
            "config: prior.beta_prior must be \"flat\" or a ridge value");
      }
    }
  }

  if (root.contains("sampler")) {
    const json& s = root["sampler"];
    require_keys(s, "sampler.", {"iterations", "burn_in", "thin", "draws",
                                 "chains", "seed", "format"});
    cfg.sampler.iterations = integer_at(s, "iterations", cfg.sampler.iterations);
    cfg.sampler.burn_in = integer_at(s, "burn_in", cfg.sampler.burn_in);
    cfg.sampler.thin = integer_at(s, "thin", cfg.sampler.thin);
    cfg.sampler.draws = integer_at(s, "draws", cfg.sampler.draws);
    cfg.sampler.chains = integer_at(s, "chains", cfg.sampler.chains);
    if (s.contains("seed")) {
      if (!s["seed"].is_number_integer())
        throw config_error("config: sampler.seed must be an integer");
      cfg.sampler.seed = s["seed"].get<std::uint64_t>();
    }
    cfg.sampler.format = string_at(s, "format", cfg.sampler.format);
    if (cfg.sampler.format != "csv" && cfg.sampler.format != "binary")
      throw config_error("config: sampler.format must be csv or binary");
  }

  if (root.contains("decision")) {
    const json& d = root["decision"];
    require_keys(d, "decision.",
                 {"epsilon", "delta", "grid_min", "grid_max", "grid_points"});
    if (d.contains("epsilon")) {
      if (d["epsilon"].is_string()) {
        if (d["epsilon"].get<std::string>() != "entropy")
          throw config_error(
              "config: decision.epsilon must be a number or \"entropy\"");
      } else if (d["epsilon"].is_number()) {
        cfg.decision.epsilon = d["epsilon"].get<double>();
      } else {
        throw config_error(
            "config: decision.epsilon must be a number or \"entropy\"");
      }
    }
    cfg.decision.delta = number_at(d, "delta", cfg.decision.delta);
    cfg.decision.grid_min = number_at(d, "grid_min", cfg.decision.grid_min);
    cfg.decision.grid_max = number_at(d, "grid_max", cfg.decision.grid_max);
    cfg.decision.grid_points =
        integer_at(d, "grid_points", cfg.decision.grid_points);
  }

  if (root.contains("simulate")) {
    const json& s = root["simulate"];
    require_keys(s, "simulate.",
                 {"rows", "cols", "beta", "sigma2", "rho", "seed"});
    cfg.simulate.rows = integer_at(s, "rows", cfg.simulate.rows);
    cfg.simulate.cols = integer_at(s, "cols", cfg.simulate.cols);
    if (s.contains("beta")) {
      if (!s["beta"].is_array())
        throw config_error("config: simulate.beta must be an array");
      cfg.simulate.beta = s["beta"].get<std::vector<double>>();
    }
    cfg.simulate.sigma2 = number_at(s, "sigma2", cfg.simulate.sigma2);
    cfg.simulate.rho = number_at(s, "rho", cfg.simulate.rho);
    if (s.contains("seed")) {
      if (!s["seed"].is_number_integer())
        throw config_error("config: simulate.seed must be an integer");
      cfg.simulate.seed = s["seed"].get<std::uint64_t>();
    }
  }

  if (root.contains("diagnose")) {
    const json& d = root["diagnose"];
    require_keys(d, "diagnose.",
                 {"rho_grid", "lppd_draws", "permutations", "classification"});
    if (d.contains("rho_grid")) {
      if (!d["rho_grid"].is_array())
        throw config_error("config: diagnose.rho_grid must be an array");
      cfg.diagnose.rho_grid = d["rho_grid"].get<std::vector<double>>();
    }
    cfg.diagnose.lppd_draws =
        integer_at(d, "lppd_draws", cfg.diagnose.lppd_draws);
    cfg.diagnose.permutations =
        integer_at(d, "permutations", cfg.diagnose.permutations);
    if (d.contains("classification")) {
      if (!d["classification"].is_boolean())
        throw config_error("config: diagnose.classification must be a bool");
      cfg.diagnose.classification = d["classification"].get<bool>();
    }
  }

  // Range validation before any computation.
  if (!(cfg.model.alpha > 0.0 && cfg.model.alpha < 1.0))
    throw config_error("config: model.alpha must lie in (0, 1)");
  if (cfg.model.c && !(*cfg.model.c > 0.0))
    throw config_error("config: model.c must be positive");
  if (cfg.model.rho && !(*cfg.model.rho > 0.0 && *cfg.model.rho < 1.0))
    throw config_error("config: model.rho must lie in (0, 1)");
  if (!(cfg.model.pc_bound > 0.0 && cfg.model.pc_bound < 1.0) ||
      !(cfg.model.pc_mass > 0.0 && cfg.model.pc_mass < 1.0))
    throw config_error("config: pc_bound and pc_mass must lie in (0, 1)");
  if (!(cfg.prior.a_sigma > 0.0 && cfg.prior.b_sigma > 0.0))
    throw config_error("config: prior.a_sigma and b_sigma must be positive");
  if (cfg.prior.ridge && !(*cfg.prior.ridge > 0.0))
    throw config_error("config: prior.beta_prior ridge must be positive");
  if (cfg.sampler.burn_in < 0 ||
      cfg.sampler.iterations <= cfg.sampler.burn_in)
    throw config_error("config: need sampler.iterations > burn_in >= 0");
  if (cfg.sampler.thin < 1) throw config_error("config: sampler.thin >= 1");
  if (cfg.sampler.draws < 1)
    throw config_error("config: sampler.draws must be positive");
  if (cfg.sampler.chains < 1)
    throw config_error("config: sampler.chains must be positive");
  if (cfg.decision.epsilon && !(*cfg.decision.epsilon > 0.0))
    throw config_error("config: decision.epsilon must be positive");
  if (!(cfg.decision.delta > 0.0 && cfg.decision.delta < 1.0))
    throw config_error("config: decision.delta must lie in (0, 1)");
  if (!(cfg.decision.grid_min > 0.0 &&
        cfg.decision.grid_max > cfg.decision.grid_min))
    throw config_error("config: need 0 < grid_min < grid_max");
  if (cfg.decision.grid_points < 2)
    throw config_error("config: decision.grid_points must be at least 2");
  if (static_cast<Index>(cfg.simulate.beta.size()) != 2)
    throw config_error("config: simulate.beta must have two entries");
  if (!(cfg.simulate.sigma2 >= 0.0))
    throw config_error("config: simulate.sigma2 must be nonnegative");
  if (!(cfg.simulate.rho > 0.0 && cfg.simulate.rho < 1.0))
    throw config_error("config: simulate.rho must lie in (0, 1)");
  for (double r : cfg.diagnose.rho_grid)
    if (!(r > 0.0 && r < 1.0))
      throw config_error("config: diagnose.rho_grid entries must lie in (0,1)");
  if (cfg.diagnose.lppd_draws < 1)
    throw config_error("config: diagnose.lppd_draws must be positive");
  if (cfg.diagnose.permutations < 0)
    throw config_error("config: diagnose.permutations must be nonnegative");
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw config_error("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str());
}

}  // namespace areal
