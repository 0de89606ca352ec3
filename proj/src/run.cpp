#include "qkin/run.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <sstream>

namespace qkin {

using nlohmann::json;

CheckResult check_at_most(const std::string& name, double value, double threshold) {
  return {name, value <= threshold, value, threshold, "<="};
}

CheckResult check_at_least(const std::string& name, double value, double threshold) {
  return {name, value >= threshold, value, threshold, ">="};
}

CheckResult check_flag(const std::string& name, bool ok) { return {name, ok, ok ? 1.0 : 0.0, 1.0, "=="}; }

Workspace::Workspace(const RunConfig& c) : config(c) {
  basis = std::make_unique<FockBasis>(c.modes, c.max_particles, c.statistics);
  model = make_field_model(c.geometry, c.modes, c.potential, CellGrid::uniform(c.geometry, c.cells),
                           c.quadrature_order, c.quadrature_tolerance);
}

const Generator& Workspace::ensure_generator() {
  if (generator) return *generator;
  if (model.pair_total.max_abs() == 0.0) {
    generator = std::make_unique<Generator>(*basis, free_coefficients(model.modes, config.statistics));
    return *generator;
  }
  const PairBasis pb = make_pair_basis(model.modes, config.statistics);
  const Complex z(pb.energies.mean(), config.epsilon);
  tmatrix = two_body_tmatrix(model.modes, model.pair_total, config.statistics, z,
                             {config.epsilon, config.condition_cap, config.extrapolate});
  const double delta = config.delta ? *config.delta : default_smearing_width(tmatrix->basis);
  generator = std::make_unique<Generator>(*basis, build_coefficients(model.modes, *tmatrix, delta));
  return *generator;
}

const CellObservables& Workspace::ensure_observables() {
  if (!observables) observables = std::make_unique<CellObservables>(*basis, model);
  return *observables;
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"modes",  "build",  "tmatrix",   "generator-check",
                                                 "maxent", "evolve", "micro-demo"};
  return names;
}

namespace {

json versions() {
  std::ostringstream eigen, js;
  eigen << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.' << EIGEN_MINOR_VERSION;
  js << NLOHMANN_JSON_VERSION_MAJOR << '.' << NLOHMANN_JSON_VERSION_MINOR << '.' << NLOHMANN_JSON_VERSION_PATCH;
  return {{"qkin", "1.0.0"}, {"eigen", eigen.str()}, {"nlohmann_json", js.str()}};
}

json to_json(const CheckResult& c) {
  json j = {{"name", c.name}, {"pass", c.pass}, {"threshold", c.threshold}, {"relation", c.relation}};
  j["value"] = std::isfinite(c.value) ? json(c.value) : json(nullptr);
  return j;
}

}  // namespace

RunOutput run_command(const std::string& command, const RunConfig& config) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  RunOutput out;
  out.report = {{"command", command}, {"config", config.echo}, {"versions", versions()}, {"results", json::object()}};
  std::vector<CheckResult> checks;
  Workspace ws(config);
  try {
    if (command == "modes") run_modes(ws, out, checks);
    else if (command == "build") run_build(ws, out, checks);
    else if (command == "tmatrix") run_tmatrix(ws, out, checks);
    else if (command == "generator-check") run_generator_check(ws, out, checks);
    else if (command == "maxent") run_maxent(ws, out, checks);
    else if (command == "evolve") run_evolve(ws, out, checks);
    else if (command == "micro-demo") run_micro_demo(ws, out, checks);
    else throw PreconditionError("unknown subcommand '" + command + "'");
  } catch (const NumericalError& e) {
    checks.push_back({command + ": numerical failure", false, std::numeric_limits<double>::quiet_NaN(), 0.0, "=="});
    out.report["error"] = e.what();
  }
  out.pass = true;
  json list = json::array();
  for (const CheckResult& c : checks) {
    out.pass = out.pass && c.pass;
    list.push_back(to_json(c));
  }
  out.report["checks"] = list;
  out.report["pass"] = out.pass;
  out.report["timing"] = {{"seconds", std::chrono::duration<double>(Clock::now() - start).count()}};
  return out;
}

json report_values(const json& report) {
  json r = report;
  r.erase("timing");
  return r;
}

void run_modes(Workspace& ws, RunOutput& out, std::vector<CheckResult>& checks) {
  const FieldModel& m = ws.model;
  std::ostringstream csv;
  csv << std::setprecision(17) << "index,n1,n2,n3,energy\n";
  json rows = json::array();
  for (int f = 0; f < m.mode_count(); ++f) {
    const Mode& md = m.modes[f];
    csv << f << ',' << md.quantum[0] << ',' << md.quantum[1] << ',' << md.quantum[2] << ',' << md.energy << '\n';
    rows.push_back({{"index", f}, {"quantum", md.quantum}, {"energy", md.energy}});
  }
  out.files["modes.csv"] = csv.str();
  Matrix overlap = Matrix::Zero(m.mode_count(), m.mode_count()), kinetic = overlap;
  for (int c = 0; c < m.cells.size(); ++c) {
    overlap += m.overlap[c];
    kinetic += m.kinetic[c];
  }
  const double wmax = m.modes.back().energy;
  out.report["results"] = {{"modes", rows}, {"quadrature_error", m.quadrature_error}};
  checks.push_back(check_at_most("mode orthonormality", (overlap - Matrix::Identity(m.mode_count(), m.mode_count())).norm(), 1e-10));
  checks.push_back(check_at_most("cell kinetic sum equals mode energies", (kinetic - m.mode_energies()).norm() / wmax, 1e-10));
  checks.push_back(check_at_most("pair tensor quadrature error", m.quadrature_error, ws.config.quadrature_tolerance));
}

void run_build(Workspace& ws, RunOutput& out, std::vector<CheckResult>& checks) {
  const FockBasis& b = *ws.basis;
  const Matrix h = hamiltonian(b, ws.model);
  const Matrix n = number_op(b);
  const double scale = std::max(1.0, h.norm());
  Matrix mass = Matrix::Zero(b.dim(), b.dim()), energy = mass;
  for (int c = 0; c < ws.model.cells.size(); ++c) {
    mass += mass_density_op(b, ws.model, c);
    energy += energy_density_op(b, ws.model, c, {0, 0, 0});
  }
  json sectors = json::array();
  for (int k = 0; k <= b.max_total_particles(); ++k) {
    const auto idx = b.sector_indices(k);
    Matrix block(idx.size(), idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i)
      for (std::size_t j = 0; j < idx.size(); ++j) block(i, j) = h(idx[i], idx[j]);
    Eigen::SelfAdjointEigenSolver<Matrix> es(block, Eigen::EigenvaluesOnly);
    sectors.push_back({{"particles", k},
                       {"states", idx.size()},
                       {"lowest", es.eigenvalues().minCoeff()},
                       {"highest", es.eigenvalues().maxCoeff()}});
  }
  out.report["results"] = {{"dimension", b.dim()}, {"hamiltonian_norm", h.norm()}, {"sectors", sectors}};
  checks.push_back(check_at_most("hamiltonian hermiticity", hermiticity_defect(h), 1e-12 * scale));
  checks.push_back(check_at_most("[H, N] = 0", (h * n - n * h).norm() / scale, 1e-12));
  checks.push_back(check_at_most("cell mass densities sum to M", (mass - mass_operator(b)).norm(), 1e-12));
  checks.push_back(check_at_most("cell energy densities sum to H", (energy - h).norm() / scale, 1e-12));
}

void run_tmatrix(Workspace& ws, RunOutput& out, std::vector<CheckResult>& checks) {
  const RunConfig& c = ws.config;
  if (ws.model.pair_total.max_abs() == 0.0) {
    out.report["results"] = {{"interaction", "none"}};
    return;
  }
  const PairBasis pb = make_pair_basis(ws.model.modes, c.statistics);
  const Complex z(pb.energies.mean(), c.epsilon);
  std::vector<double> factors = c.couplings.empty() ? std::vector<double>{1.0} : c.couplings;
  std::sort(factors.begin(), factors.end(), std::greater<>());
  json sweep = json::array();
  std::vector<double> born;
  double worst_residual = 0.0;
  std::ostringstream csv;
  csv << std::setprecision(17) << "coupling,out,in,pair_out,pair_in,re_t,im_t,re_t_on,im_t_on,v\n";
  for (double g : factors) {
    const CTensor4 v = g * ws.model.pair_total;
    const TwoBodyTMatrix t =
        two_body_tmatrix(ws.model.modes, v, c.statistics, z, {c.epsilon, c.condition_cap, c.extrapolate});
    const int n = t.basis.size();
    Matrix g0 = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) g0(i, i) = 1.0 / (z - t.basis.energies(i));
    const double vnorm = t.v_pair.norm();
    const double residual = (t.t - t.v_pair - t.v_pair * g0 * t.t).norm() / std::max(vnorm, 1e-300);
    worst_residual = std::max(worst_residual, residual);
    born.push_back((t.t - t.v_pair).norm() / std::max(vnorm, 1e-300));
    const auto tau0 = collision_time_estimate(t);
    sweep.push_back({{"coupling", g},
                     {"born_deviation", born.back()},
                     {"lippmann_schwinger_residual", residual},
                     {"condition", t.condition},
                     {"tau0", tau0 ? json(*tau0) : json(nullptr)},
                     {"max_on_shell", t.on_shell.cwiseAbs().maxCoeff()}});
    for (int o = 0; o < n; ++o)
      for (int i = 0; i < n; ++i) {
        const auto [a1, a2] = t.basis.pairs[o];
        const auto [b1, b2] = t.basis.pairs[i];
        csv << g << ',' << o << ',' << i << ',' << a1 << '-' << a2 << ',' << b1 << '-' << b2 << ',' << t.t(o, i).real()
            << ',' << t.t(o, i).imag() << ',' << t.on_shell(o, i).real() << ',' << t.on_shell(o, i).imag() << ','
            << t.v_pair(o, i).real() << '\n';
      }
    checks.push_back(check_at_most("condition number at coupling " + std::to_string(g), t.condition, c.condition_cap));
  }
  out.files["tmatrix.csv"] = csv.str();
  out.report["results"] = {{"z", {z.real(), z.imag()}}, {"sweep", sweep}};
  checks.push_back(check_at_most("Lippmann-Schwinger residual", worst_residual, 1e-10));
  bool monotone = true;
  for (std::size_t i = 1; i < born.size(); ++i) monotone = monotone && born[i] < born[i - 1];
  checks.push_back(check_flag("Born deviation shrinks with the coupling", monotone));
}

}  // namespace qkin
