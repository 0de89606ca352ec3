#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "qkin/field_model.hpp"
#include "qkin/fock.hpp"
#include "qkin/gibbs.hpp"

namespace qkin {

/// Raised for schema violations: unknown keys, wrong types, out-of-range values.
class ConfigError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

struct RunConfig {
  nlohmann::json echo;  // fully merged configuration

  BoxGeometry geometry;
  Statistics statistics = Statistics::Bose;
  int modes = 3;
  int max_particles = 2;
  Potential potential;
  int cells = 1;
  int quadrature_order = 24;
  double quadrature_tolerance = 1e-8;

  std::optional<double> delta;  // smearing width; default from pair spacing
  double epsilon = 1e-3;
  double condition_cap = 1e10;
  bool extrapolate = false;

  LagrangeFields initial;  // per-cell fields

  double t_span = 1.0;
  double dt = 0.25;
  double refit_tolerance = 1e-10;

  int positivity_samples = 1000;
  double tau_max = 1e-3;
  int maximality_perturbations = 20;
  std::vector<double> couplings;  // coupling sweep factors for tmatrix

  int micro_q_dim = 3;
  int micro_instances = 100;

  std::uint64_t seed = 1;
  std::string output_dir = "out";
};

/// The documented schema with every default filled in.
nlohmann::json default_config();

/// Applies "a.b.c=value" overrides; values parse as JSON when possible and
/// fall back to strings.
void apply_overrides(nlohmann::json& j, const std::vector<std::string>& overrides);

/// Validates `user` against the schema (unknown keys and type mismatches are
/// rejected), merges it onto the defaults and extracts a RunConfig.
RunConfig parse_config(const nlohmann::json& user);
RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});

}  // namespace qkin
