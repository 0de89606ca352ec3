#include "qkin/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace qkin {

using nlohmann::json;

json default_config() {
  return json{
      {"geometry", {{"dimension", 1}, {"lengths", {1.0, 1.0, 1.0}}}},
      {"statistics", "bose"},
      {"modes", 3},
      {"max_particles", 2},
      {"potential", {{"kind", "gaussian"}, {"strength", 0.05}, {"range", 0.1}, {"core", 0.05}}},
      {"cells", 1},
      {"quadrature", {{"order", 24}, {"tolerance", 1e-8}}},
      {"generator", {{"delta", nullptr}, {"epsilon", 1e-3}, {"condition_cap", 1e10}, {"extrapolate", false}}},
      {"initial", {{"beta", 0.1}, {"mu", 0.0}, {"cells", json::array()}}},
      {"integrator", {{"t_span", 1.0}, {"dt", 0.25}, {"refit_tolerance", 1e-10}}},
      {"checks",
       {{"positivity_samples", 1000},
        {"tau_max", 1e-3},
        {"maximality_perturbations", 20},
        {"couplings", {1.0, 0.5, 0.25}}}},
      {"micro", {{"q_dim", 3}, {"instances", 100}}},
      {"seed", 1},
      {"output_dir", "out"},
  };
}

namespace {

const json& cell_schema() {
  static const json s = {{"beta", 0.1}, {"mu", 0.0}, {"v", {0.0, 0.0, 0.0}}};
  return s;
}

bool same_kind(const json& schema, const json& value) {
  if (schema.is_null()) return value.is_null() || value.is_number();
  if (schema.is_number_integer() || schema.is_number_unsigned()) return value.is_number_integer() || value.is_number_unsigned();
  if (schema.is_number()) return value.is_number();
  if (schema.is_boolean()) return value.is_boolean();
  if (schema.is_string()) return value.is_string();
  if (schema.is_array()) return value.is_array();
  if (schema.is_object()) return value.is_object();
  return false;
}

json merge(const json& schema, const json& user, const std::string& path) {
  if (!same_kind(schema, user)) throw ConfigError("config: '" + path + "' has the wrong type");
  if (schema.is_object()) {
    json out = schema;
    for (auto it = user.begin(); it != user.end(); ++it) {
      const std::string sub = path.empty() ? it.key() : path + "." + it.key();
      if (!schema.contains(it.key())) throw ConfigError("config: unknown key '" + sub + "'");
      out[it.key()] = merge(schema[it.key()], it.value(), sub);
    }
    return out;
  }
  if (schema.is_array()) {
    json out = json::array();
    for (std::size_t i = 0; i < user.size(); ++i) {
      const std::string sub = path + "[" + std::to_string(i) + "]";
      if (path == "initial.cells") out.push_back(merge(cell_schema(), user[i], sub));
      else if (!user[i].is_number()) throw ConfigError("config: '" + sub + "' must be a number");
      else out.push_back(user[i]);
    }
    return out;
  }
  return user;
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError("config: " + msg);
}

double finite(const json& j, const std::string& name) {
  const double x = j.get<double>();
  require(std::isfinite(x), name + " must be finite");
  return x;
}

Potential::Kind potential_kind(const std::string& s) {
  if (s == "zero") return Potential::Kind::Zero;
  if (s == "gaussian") return Potential::Kind::Gaussian;
  if (s == "contact") return Potential::Kind::Contact;
  if (s == "soft_lj") return Potential::Kind::SoftLennardJones;
  throw ConfigError("config: potential.kind must be zero|gaussian|contact|soft_lj");
}

}  // namespace

void apply_overrides(json& j, const std::vector<std::string>& overrides) {
  for (const std::string& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("config: override '" + o + "' is not key=value");
    const std::string key = o.substr(0, eq), raw = o.substr(eq + 1);
    json value = json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;
    json* node = &j;
    std::stringstream ss(key);
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(ss, part, '.')) parts.push_back(part);
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
      if (!node->contains(parts[i])) (*node)[parts[i]] = json::object();
      node = &(*node)[parts[i]];
      if (!node->is_object()) throw ConfigError("config: override path '" + key + "' crosses a non-object");
    }
    (*node)[parts.back()] = value;
  }
}

RunConfig parse_config(const json& user) {
  require(user.is_object(), "top level must be an object");
  const json j = merge(default_config(), user, "");
  RunConfig c;
  c.echo = j;

  const int dim = j["geometry"]["dimension"].get<int>();
  require(dim == 1 || dim == 3, "geometry.dimension must be 1 or 3");
  c.geometry.dimension = dim == 1 ? Dimension::One : Dimension::Three;
  const json& lengths = j["geometry"]["lengths"];
  require(lengths.size() == 3, "geometry.lengths must have three entries");
  for (int a = 0; a < 3; ++a) {
    c.geometry.lengths[a] = finite(lengths[a], "geometry.lengths");
    require(c.geometry.lengths[a] > 0, "geometry.lengths must be positive");
  }

  try {
    c.statistics = statistics_from_string(j["statistics"].get<std::string>());
  } catch (const PreconditionError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.modes = j["modes"].get<int>();
  require(c.modes >= 1 && c.modes <= 64, "modes must be in [1, 64]");
  c.max_particles = j["max_particles"].get<int>();
  require(c.max_particles >= 0 && c.max_particles <= 12, "max_particles must be in [0, 12]");
  require(c.statistics == Statistics::Bose || c.max_particles <= c.modes,
          "fermionic max_particles cannot exceed modes");

  const json& p = j["potential"];
  c.potential.kind = potential_kind(p["kind"].get<std::string>());
  c.potential.strength = finite(p["strength"], "potential.strength");
  c.potential.range = finite(p["range"], "potential.range");
  c.potential.core = finite(p["core"], "potential.core");
  require(c.potential.range > 0, "potential.range must be positive");
  require(c.potential.core >= 0, "potential.core must be non-negative");
  if (c.potential.kind == Potential::Kind::Zero) c.potential.strength = 0.0;

  c.cells = j["cells"].get<int>();
  require(c.cells >= 1 && c.cells <= 64, "cells must be in [1, 64]");
  c.quadrature_order = j["quadrature"]["order"].get<int>();
  require(c.quadrature_order >= 4 && c.quadrature_order <= 400, "quadrature.order must be in [4, 400]");
  c.quadrature_tolerance = finite(j["quadrature"]["tolerance"], "quadrature.tolerance");
  require(c.quadrature_tolerance > 0, "quadrature.tolerance must be positive");

  const json& g = j["generator"];
  if (!g["delta"].is_null()) {
    c.delta = finite(g["delta"], "generator.delta");
    require(*c.delta > 0, "generator.delta must be positive");
  }
  c.epsilon = finite(g["epsilon"], "generator.epsilon");
  require(c.epsilon > 0, "generator.epsilon must be positive");
  c.condition_cap = finite(g["condition_cap"], "generator.condition_cap");
  require(c.condition_cap > 1, "generator.condition_cap must exceed 1");
  c.extrapolate = g["extrapolate"].get<bool>();

  const json& ini = j["initial"];
  const double beta = finite(ini["beta"], "initial.beta"), mu = finite(ini["mu"], "initial.mu");
  require(beta > 0, "initial.beta must be positive");
  c.initial = LagrangeFields::uniform(c.cells, beta, mu);
  if (!ini["cells"].empty()) {
    require(static_cast<int>(ini["cells"].size()) == c.cells, "initial.cells must list one entry per cell");
    for (int k = 0; k < c.cells; ++k) {
      const json& e = ini["cells"][k];
      CellFields& f = c.initial.cells[k];
      f.beta = finite(e["beta"], "initial.cells.beta");
      f.mu = finite(e["mu"], "initial.cells.mu");
      require(f.beta > 0, "initial.cells.beta must be positive");
      require(e["v"].size() == 3, "initial.cells.v must have three entries");
      for (int a = 0; a < 3; ++a) f.v[a] = finite(e["v"][a], "initial.cells.v");
    }
  }

  const json& it = j["integrator"];
  c.t_span = finite(it["t_span"], "integrator.t_span");
  c.dt = finite(it["dt"], "integrator.dt");
  c.refit_tolerance = finite(it["refit_tolerance"], "integrator.refit_tolerance");
  require(c.t_span > 0 && c.dt > 0, "integrator.t_span and integrator.dt must be positive");
  require(c.refit_tolerance > 0, "integrator.refit_tolerance must be positive");

  const json& ch = j["checks"];
  c.positivity_samples = ch["positivity_samples"].get<int>();
  require(c.positivity_samples >= 1, "checks.positivity_samples must be >= 1");
  c.tau_max = finite(ch["tau_max"], "checks.tau_max");
  require(c.tau_max > 0, "checks.tau_max must be positive");
  c.maximality_perturbations = ch["maximality_perturbations"].get<int>();
  require(c.maximality_perturbations >= 1, "checks.maximality_perturbations must be >= 1");
  for (const json& x : ch["couplings"]) {
    c.couplings.push_back(finite(x, "checks.couplings"));
    require(c.couplings.back() > 0, "checks.couplings must be positive");
  }

  c.micro_q_dim = j["micro"]["q_dim"].get<int>();
  require(c.micro_q_dim >= 1 && c.micro_q_dim <= 16, "micro.q_dim must be in [1, 16]");
  c.micro_instances = j["micro"]["instances"].get<int>();
  require(c.micro_instances >= 1, "micro.instances must be >= 1");

  const json& seed = j["seed"];
  require(seed.is_number_unsigned() || (seed.is_number_integer() && seed.get<long long>() >= 0),
          "seed must be a non-negative integer");
  c.seed = seed.get<std::uint64_t>();
  c.output_dir = j["output_dir"].get<std::string>();
  require(!c.output_dir.empty(), "output_dir must not be empty");
  return c;
}

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot read '" + path + "'");
  json user = json::parse(in, nullptr, false, true);
  if (user.is_discarded()) throw ConfigError("config: '" + path + "' is not valid JSON");
  apply_overrides(user, overrides);
  return parse_config(user);
}

}  // namespace qkin
