#include <cmath>
#include <iomanip>
#include <sstream>

#include "qkin/microsystem.hpp"
#include "qkin/random.hpp"
#include "qkin/run.hpp"

namespace qkin {

using nlohmann::json;

namespace {

json fields_json(const LagrangeFields& f, int axes) {
  json cells = json::array();
  for (const CellFields& c : f.cells)
    cells.push_back({{"beta", c.beta}, {"mu", c.mu}, {"v", std::vector<double>(c.v.begin(), c.v.begin() + axes)}});
  return cells;
}

LagrangeFields cell_average(const LagrangeFields& f) {
  double beta = 0.0, mu = 0.0;
  for (const CellFields& c : f.cells) {
    beta += c.beta;
    mu += c.mu;
  }
  return LagrangeFields::uniform(f.size(), beta / f.size(), mu / f.size());
}

}  // namespace

void run_generator_check(Workspace& ws, RunOutput& out, std::vector<CheckResult>& checks) {
  const RunConfig& c = ws.config;
  const Generator& gen = ws.ensure_generator();
  const bool collisions = gen.coefficients().tau0.has_value();
  const PositivityReport pos = positivity_check(gen, c.positivity_samples, c.tau_max, c.seed);
  const ConservationReport cons = conservation_report(gen);
  const GainLossTraces gl = two_particle_gain_loss(gen);
  Eigen::SelfAdjointEigenSolver<Matrix> es(gen.gamma(), Eigen::EigenvaluesOnly);
  const double scale = std::max(1.0, gen.effective_hamiltonian().norm());

  json witness = nullptr;
  if (pos.negative_tau_witness)
    witness = {{"tau", pos.negative_tau_witness->tau},
               {"re_q", pos.negative_tau_witness->q.real()},
               {"im_q", pos.negative_tau_witness->q.imag()},
               {"kernel_projected", pos.negative_tau_witness->kernel_projected}};
  out.report["results"] = {
      {"delta", gen.coefficients().delta},
      {"tau0", collisions ? json(*gen.coefficients().tau0) : json(nullptr)},
      {"positivity",
       {{"samples", pos.samples},
        {"tau_max", pos.tau_max},
        {"min_re_q", pos.min_re_q},
        {"max_abs_im_q", pos.max_abs_im_q},
        {"negative_tau_samples", pos.negative_tau_samples},
        {"min_re_q_negative_tau", pos.min_re_q_negative_tau},
        {"negative_tau_witness", witness}}},
      {"mass_residual", cons.mass_residual},
      {"energy_residual", cons.energy_residual},
      {"two_particle_gain", gl.gain},
      {"two_particle_loss", gl.loss}};

  checks.push_back(check_at_least("positivity min Re Q", pos.min_re_q, -1e-10));
  checks.push_back(check_at_most("positivity max |Im Q|", pos.max_abs_im_q, 1e-10));
  checks.push_back(check_at_most("mass conservation |L'(M)|", cons.mass_residual, 1e-10));
  checks.push_back(check_at_most("effective Hamiltonian hermiticity", hermiticity_defect(gen.effective_hamiltonian()), 1e-12 * scale));
  checks.push_back(check_at_least("damping operator positivity", es.eigenvalues().minCoeff(), -1e-12 * scale));
  if (collisions) {
    checks.push_back(check_at_most("arrow of time: negative-tau witness Re Q", pos.min_re_q_negative_tau, -1e-10));
  } else {
    checks.push_back(check_at_most("free energy residual |L'(H0)|", cons.energy_residual, 0.0));
  }
}

void run_maxent(Workspace& ws, RunOutput& out, std::vector<CheckResult>& checks) {
  const RunConfig& c = ws.config;
  const CellObservables& obs = ws.ensure_observables();
  const LagrangeFields& truth = c.initial;
  truth.validate();
  const GibbsState g = gibbs_state(obs, truth);
  const ConstraintSet targets = expectations(g, obs);
  const LagrangeFields start = initial_fields(obs, targets);
  FitOptions fo;
  fo.tolerance = 1e-10;
  const FitResult fit = maxent_fit(obs, targets, start, fo);
  const MaximalityReport mx = maximality_check(obs, fit.state, c.maximality_perturbations, c.seed);

  const RealVector x_true = truth.pack(obs.axes()), x_fit = fit.fields.pack(obs.axes());
  const double recovery = (x_fit - x_true).norm() / std::max(1e-300, x_true.norm());
  const double residual = constraint_residual(obs, fit.state, targets);

  std::ostringstream csv;
  csv << std::setprecision(17) << "iteration,max_scaled_residual,step,dual\n";
  json trace = json::array();
  for (const FitIteration& it : fit.trace) {
    csv << it.iteration << ',' << it.max_scaled_residual << ',' << it.step << ',' << it.dual << '\n';
    trace.push_back({{"iteration", it.iteration}, {"residual", it.max_scaled_residual}, {"step", it.step}, {"dual", it.dual}});
  }
  out.files["fit_trace.csv"] = csv.str();
  out.report["results"] = {{"true_fields", fields_json(truth, obs.axes())},
                           {"start_fields", fields_json(start, obs.axes())},
                           {"fitted_fields", fields_json(fit.fields, obs.axes())},
                           {"iterations", fit.iterations},
                           {"relative_recovery_error", recovery},
                           {"constraint_residual", residual},
                           {"entropy", mx.entropy_fit},
                           {"max_entropy_perturbed", mx.max_entropy_perturbed},
                           {"max_perturbation_constraint_shift", mx.max_constraint_shift},
                           {"trace", trace}};
  checks.push_back(check_at_most("Newton iterations", fit.iterations, 50));
  checks.push_back(check_at_most("relative field recovery error", recovery, 1e-6));
  checks.push_back(check_at_most("fitted constraint residual", residual, 1e-8));
  checks.push_back(check_flag("entropy maximal among " + std::to_string(mx.perturbations) + " constrained perturbations", mx.pass));
}

void run_evolve(Workspace& ws, RunOutput& out, std::vector<CheckResult>& checks) {
  const RunConfig& c = ws.config;
  const CellObservables& obs = ws.ensure_observables();
  const Generator& gen = ws.ensure_generator();
  const ClosureSystem sys(obs, gen);
  IntegrateOptions io;
  io.refit_tolerance = c.refit_tolerance;

  const double rate_perturbed = closure_rhs(sys, c.initial).dfields.norm();
  const double rate_uniform = closure_rhs(sys, cell_average(c.initial)).dfields.norm();
  const double stationarity = rate_uniform / std::max(rate_perturbed, 1e-300);
  out.report["results"] = {{"tau0", sys.tau0() ? json(*sys.tau0()) : json(nullptr)},
                           {"rate_perturbed", rate_perturbed},
                           {"rate_uniform", rate_uniform},
                           {"stationarity_ratio", stationarity}};
  checks.push_back(check_at_most("uniform equilibrium stationarity ratio", stationarity, 1e-2));

  const StateTrajectory tr = integrate(sys, c.initial, c.t_span, c.dt, io);
  std::ostringstream csv;
  write_trajectory_csv(tr, obs.axes(), csv);
  out.files["trajectory.csv"] = csv.str();

  double worst_contrast_rise = 0.0, worst_entropy_drop = 0.0, worst_refit = 0.0;
  for (std::size_t i = 1; i < tr.points.size(); ++i) {
    worst_contrast_rise = std::max(worst_contrast_rise, tr.beta_contrast(i) - tr.beta_contrast(i - 1));
    worst_entropy_drop = std::max(worst_entropy_drop, tr.points[i - 1].entropy - tr.points[i].entropy);
    worst_refit = std::max(worst_refit, tr.points[i].refit_residual);
  }
  auto& r = out.report["results"];
  r["points"] = tr.points.size();
  r["rejected_steps"] = tr.rejected_steps;
  r["mass_drift"] = tr.mass_drift();
  r["energy_drift"] = tr.energy_drift();
  r["beta_contrast_initial"] = tr.beta_contrast(0);
  r["beta_contrast_final"] = tr.beta_contrast(static_cast<int>(tr.points.size()) - 1);
  r["entropy_initial"] = tr.points.front().entropy;
  r["entropy_final"] = tr.points.back().entropy;
  r["final_fields"] = fields_json(tr.points.back().fields, obs.axes());
  checks.push_back(check_at_most("total mass drift", tr.mass_drift(), 1e-8));
  checks.push_back(check_at_most("beta-contrast increase per step", worst_contrast_rise, 0.0));
  checks.push_back(check_at_most("entropy decrease per step", worst_entropy_drop, 1e-9));
  checks.push_back(check_at_most("projection re-fit residual", worst_refit, c.refit_tolerance));
}

void run_micro_demo(Workspace& ws, RunOutput& out, std::vector<CheckResult>& checks) {
  const RunConfig& c = ws.config;
  const JointSpace js(*ws.basis, {c.micro_q_dim, 1});
  RandomSource rng(c.seed);
  std::ostringstream csv;
  csv << std::setprecision(17) << "instance,full_re,full_im,reduced_re,reduced_im,difference\n";
  double worst_trace = 0.0, worst_charge = 0.0, worst_vacuum = 0.0, worst_negative = 0.0;
  for (int i = 0; i < c.micro_instances; ++i) {
    const Matrix rho_m = js.vacuum_embed(rng.density(js.macro_dim(), std::min(3, js.macro_dim())));
    const Matrix rho1 = rng.density(js.q_dim(), std::min(2, js.q_dim()));
    const Matrix a = rng.hermitian(js.q_dim());
    const JointState st = embed_joint(js, rho_m, rho1);
    const Complex full = full_expectation(js, a, st), reduced = reduce_expectation(a, st);
    const double diff = std::abs(full - reduced);
    worst_trace = std::max(worst_trace, diff);
    worst_charge = std::max(worst_charge, (js.charge() * st.rho - st.rho).norm());
    worst_vacuum = std::max(worst_vacuum, (js.charge() * rho_m).norm());
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (st.rho + st.rho.adjoint()), Eigen::EigenvaluesOnly);
    worst_negative = std::max(worst_negative, -es.eigenvalues().minCoeff());
    csv << i << ',' << full.real() << ',' << full.imag() << ',' << reduced.real() << ',' << reduced.imag() << ','
        << diff << '\n';
  }
  out.files["micro.csv"] = csv.str();
  out.report["results"] = {{"instances", c.micro_instances},
                           {"joint_dimension", js.dim()},
                           {"max_trace_difference", worst_trace},
                           {"max_charge_defect", worst_charge},
                           {"max_vacuum_charge", worst_vacuum},
                           {"max_negative_eigenvalue", worst_negative}};
  checks.push_back(check_at_most("two-sided trace identity", worst_trace, 1e-12));
  checks.push_back(check_at_most("Q rho = rho", worst_charge, 1e-12));
  checks.push_back(check_at_most("Q rho_M = 0", worst_vacuum, 1e-12));
  checks.push_back(check_at_most("embedded state positivity", worst_negative, 1e-12));
}

}  // namespace qkin
