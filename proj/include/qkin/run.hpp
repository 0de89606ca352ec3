#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "qkin/config.hpp"
#include "qkin/generator.hpp"
#include "qkin/kinetics.hpp"

namespace qkin {

/// One asserted invariant with its measured value.
struct CheckResult {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string relation = "<=";  // how value compares to threshold when passing
};

struct RunOutput {
  nlohmann::json report;
  std::map<std::string, std::string> files;  // artifact name -> contents
  bool pass = false;
};

/// Everything a subcommand needs, built once from a RunConfig.
struct Workspace {
  RunConfig config;
  std::unique_ptr<FockBasis> basis;
  FieldModel model;
  std::optional<TwoBodyTMatrix> tmatrix;  // absent for a zero potential
  std::unique_ptr<Generator> generator;
  std::unique_ptr<CellObservables> observables;

  explicit Workspace(const RunConfig& c);
  /// Builds the T-matrix and generator on first use.
  const Generator& ensure_generator();
  const CellObservables& ensure_observables();
};

const std::vector<std::string>& command_names();

/// Runs one subcommand. Numerical failures become failing checks named
/// after the step that raised them; precondition errors propagate.
RunOutput run_command(const std::string& command, const RunConfig& config);

/// The report without its timing block, for reproducibility comparisons.
nlohmann::json report_values(const nlohmann::json& report);

// Individual subcommands; each fills `out.report["results"]` and appends
// its asserted invariants to `checks`.
void run_modes(Workspace& ws, RunOutput& out, std::vector<CheckResult>& checks);
void run_build(Workspace& ws, RunOutput& out, std::vector<CheckResult>& checks);
void run_tmatrix(Workspace& ws, RunOutput& out, std::vector<CheckResult>& checks);
void run_generator_check(Workspace& ws, RunOutput& out, std::vector<CheckResult>& checks);
void run_maxent(Workspace& ws, RunOutput& out, std::vector<CheckResult>& checks);
void run_evolve(Workspace& ws, RunOutput& out, std::vector<CheckResult>& checks);
void run_micro_demo(Workspace& ws, RunOutput& out, std::vector<CheckResult>& checks);

/// value <= threshold (NaN fails).
CheckResult check_at_most(const std::string& name, double value, double threshold);
CheckResult check_at_least(const std::string& name, double value, double threshold);
CheckResult check_flag(const std::string& name, bool ok);

}  // namespace qkin
