#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "qkin/microsystem.hpp"
#include "qkin/random.hpp"
#include "qkin/run.hpp"

using namespace qkin;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
  std::vector<std::string> notes;
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

std::string sci(double x) { return fmt("%.3e", x); }

// Desk-scale model: 1D unit box, Gaussian pair potential.
struct Desk {
  std::unique_ptr<FockBasis> basis;
  FieldModel model;
  TwoBodyTMatrix t;
  std::unique_ptr<Generator> gen;
  double delta = 0.0;

  Desk(int modes, int n_max, double coupling, int cells = 1, double delta_factor = 1.0,
       Statistics stats = Statistics::Bose) {
    BoxGeometry line;
    basis = std::make_unique<FockBasis>(modes, n_max, stats);
    model = make_field_model(line, modes, Potential::gaussian(coupling, 0.1), CellGrid::uniform(line, cells), 32);
    t = two_body_tmatrix(model.modes, model.pair_total, stats, Complex(0, 0.5), {0.5});
    delta = delta_factor * default_smearing_width(t.basis);
    gen = std::make_unique<Generator>(*basis, build_coefficients(model.modes, t, delta));
  }
  double tau0() const { return *gen->coefficients().tau0; }
};

Matrix below_top(const FockBasis& b) {
  Matrix p = Matrix::Zero(b.dim(), b.dim());
  for (int n = 0; n < b.max_total_particles(); ++n) p += b.sector_projector(n);
  return p;
}

Outcome algebra() {
  double ccr = 0.0, car = 0.0, mass = 0.0, energy = 0.0;
  {
    FockBasis b(3, 3, Statistics::Bose);
    const Matrix p = below_top(b), id = Matrix::Identity(b.dim(), b.dim());
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const Matrix& ai = b.annihilator(i);
        const Matrix& aj = b.annihilator(j);
        const Matrix c = ai * aj.adjoint() - aj.adjoint() * ai - (i == j ? 1.0 : 0.0) * id;
        ccr = std::max({ccr, (p * c * p).norm(), (ai * aj - aj * ai).norm()});
      }
  }
  {
    FockBasis b(4, 4, Statistics::Fermi);
    const Matrix id = Matrix::Identity(b.dim(), b.dim());
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        const Matrix& ai = b.annihilator(i);
        const Matrix& aj = b.annihilator(j);
        car = std::max({car, (ai * aj.adjoint() + aj.adjoint() * ai - (i == j ? 1.0 : 0.0) * id).norm(),
                        (ai * aj + aj * ai).norm()});
      }
  }
  for (int cells : {2, 3}) {
    BoxGeometry line;
    const FieldModel fm = make_field_model(line, 3, Potential::gaussian(0.5, 0.1), CellGrid::uniform(line, cells), 24);
    FockBasis b(3, 2, Statistics::Bose);
    const Matrix h = hamiltonian(b, fm);
    Matrix ms = Matrix::Zero(b.dim(), b.dim()), es = ms;
    for (int c = 0; c < cells; ++c) {
      ms += mass_density_op(b, fm, c);
      es += energy_density_op(b, fm, c, {0, 0, 0});
    }
    mass = std::max(mass, (ms - mass_operator(b)).norm());
    energy = std::max(energy, (es - h).norm() / std::max(1.0, h.norm()));
  }
  Outcome o;
  o.pass = ccr <= 1e-12 && car <= 1e-12 && mass <= 1e-12 && energy <= 1e-12;
  o.detail = "CCR " + sci(ccr) + ", CAR " + sci(car) + " (<= 1e-12); sum_c M_c - M " + sci(mass) +
             ", sum_c E_c - H (rel) " + sci(energy) + " (<= 1e-12)";
  return o;
}

Outcome resolvent_identity() {
  Desk d(3, 2, 0.5);
  const Matrix h0 = free_hamiltonian(*d.basis, d.model);
  const Matrix v = two_body_operator(*d.basis, d.model.pair_total);
  const SpectralDecomposition full = spectral_decomposition(h0 + v), free = spectral_decomposition(h0);
  RandomSource rng(2024);
  double worst = 0.0;
  for (int draw = 0; draw < 50; ++draw) {
    const double re = rng.uniform(0.1, 5.0) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
    const Complex z(re, rng.uniform(-150.0, 150.0));
    const Matrix x = rng.matrix(d.basis->dim(), d.basis->dim());
    const Matrix g0x = resolvent_apply(free, z, x);
    const Matrix rhs = g0x + resolvent_apply(free, z, scattering_map_apply(h0, v, z, g0x));
    worst = std::max(worst, (resolvent_apply(full, z, x) - rhs).norm());
  }
  return {worst <= 1e-9, "max |(z-H')^-1 X - [G0 + G0 T G0] X|_F over 50 draws = " + sci(worst) + " (<= 1e-9)", {}};
}

Outcome coarse_grained() {
  const std::vector<double> couplings = {0.5, 0.25, 0.125};
  std::vector<std::unique_ptr<Desk>> desks;
  for (double g : couplings) desks.push_back(std::make_unique<Desk>(3, 2, g));
  const int f = 3;
  Outcome o;
  int tested = 0, decreasing = 0;
  double worst_exponent = std::numeric_limits<double>::infinity();
  for (int h = 0; h < f; ++h)
    for (int k = 0; k < f; ++k) {
      std::vector<double> deltas;
      bool ok = true;
      for (const auto& d : desks) {
        const double gap = d->model.modes[h].energy - d->model.modes[k].energy;
        try {
          CoarseWindow w = CoarseWindow::make(d->tau0(), gap, 1);
          w.samples = {w.mid()};
          const Matrix h0 = free_hamiltonian(*d->basis, d->model);
          const Matrix v = two_body_operator(*d->basis, d->model.pair_total);
          const Matrix x = d->basis->creator(h) * d->basis->annihilator(k);
          deltas.push_back(coarse_grained_check(h0, v, x, d->gen->apply(h, k), h, k, w).samples.front().delta);
        } catch (const NumericalError&) {
          ok = false;
          break;
        }
      }
      if (!ok) {
        o.notes.push_back("(" + std::to_string(h) + "," + std::to_string(k) + "): window 5 tau0 < t < t_max/5 empty");
        continue;
      }
      ++tested;
      const bool dec = deltas[1] < deltas[0] && deltas[2] < deltas[1];
      if (dec) ++decreasing;
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      for (int i = 0; i < 3; ++i) {
        const double lx = std::log(couplings[i]), ly = std::log(deltas[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
      }
      const double exponent = (3 * sxy - sx * sy) / (3 * sxx - sx * sx);
      worst_exponent = std::min(worst_exponent, exponent);
      o.notes.push_back("(" + std::to_string(h) + "," + std::to_string(k) + "): delta = " + sci(deltas[0]) + ", " +
                        sci(deltas[1]) + ", " + sci(deltas[2]) + "; exponent " + fmt("%.3f", exponent));
    }
  o.pass = tested > 0 && decreasing == tested;
  o.detail = std::to_string(decreasing) + "/" + std::to_string(tested) +
             " tested bilinears decrease under g -> g/2 at couplings 0.5, 0.25, 0.125; min fitted exponent " +
             (tested ? fmt("%.3f", worst_exponent) : std::string("n/a")) + " (expected >= 1)";
  return o;
}

Outcome positivity() {
  Desk d(3, 2, 0.5);
  const double tau_max = 1e-3;
  const PositivityReport r = positivity_check(*d.gen, 1000, tau_max, 7);
  const bool witness = r.negative_tau_witness && r.negative_tau_witness->q.real() < -1e-10;
  Outcome o;
  o.pass = r.samples >= 1000 && r.min_re_q > -1e-10 && r.max_abs_im_q <= 1e-10 && witness;
  o.detail = std::to_string(r.samples) + " families, tau in (0, " + sci(tau_max) + "]: min Re Q " + sci(r.min_re_q) +
             " (> -1e-10), max |Im Q| " + sci(r.max_abs_im_q) + " (<= 1e-10); tau < 0 witness Re Q " +
             (r.negative_tau_witness ? sci(r.negative_tau_witness->q.real()) : std::string("none"));
  return o;
}

Outcome conservation() {
  Desk small(3, 2, 0.5);
  const double mass_small = conservation_report(*small.gen).mass_residual;
  // 1D modes 1..7 with the resonance W_1 + W_7 = W_5 + W_5.
  Desk res(7, 2, 0.5);
  const double d0 = default_smearing_width(res.t.basis);
  const auto rows = energy_residual_sweep(*res.basis, res.model.modes, res.t, {d0, d0 / 2, d0 / 4});
  double mass = mass_small, min_ratio = std::numeric_limits<double>::infinity();
  Outcome o;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    mass = std::max(mass, rows[i].mass_residual);
    o.notes.push_back("Delta = " + sci(rows[i].delta) + ": |L'(E)|_F = " + sci(rows[i].energy_residual) +
                      ", |L'(M)|_F = " + sci(rows[i].mass_residual));
    if (i > 0) min_ratio = std::min(min_ratio, rows[i - 1].energy_residual / rows[i].energy_residual);
  }
  o.pass = mass <= 1e-10 && min_ratio >= 2.0;
  o.detail = "max |L'(M)|_F " + sci(mass) + " (<= 1e-10); energy residual reduction per Delta halving (F=7 resonant) min " +
             fmt("%.2f", min_ratio) + "x (>= 2)";
  return o;
}

Outcome maxent_round_trip() {
  BoxGeometry line;
  FockBasis basis(3, 2, Statistics::Bose);
  const FieldModel fm = make_field_model(line, 3, Potential::gaussian(0.5, 0.1), CellGrid::uniform(line, 2), 24);
  const CellObservables obs(basis, fm);
  LagrangeFields truth = LagrangeFields::uniform(2, 0.12, -3.0);
  truth.cells[0].v[0] = 0.4;
  truth.cells[1].beta = 0.09;
  truth.cells[1].mu = -1.0;
  truth.cells[1].v[0] = -0.25;
  const ConstraintSet targets = expectations(gibbs_state(obs, truth), obs);
  FitOptions fo;
  fo.tolerance = 1e-10;
  const FitResult fit = maxent_fit(obs, targets, initial_fields(obs, targets), fo);
  const double rel = (fit.fields.pack(1) - truth.pack(1)).norm() / truth.pack(1).norm();
  const double residual = constraint_residual(obs, fit.state, targets);
  const MaximalityReport mx = maximality_check(obs, fit.state, 20, 11);
  Outcome o;
  o.pass = fit.iterations <= 50 && rel <= 1e-6 && residual <= 1e-8 && mx.pass && mx.perturbations == 20;
  o.detail = "fields recovered to " + sci(rel) + " rel (<= 1e-6) in " + std::to_string(fit.iterations) +
             " Newton iterations (<= 50); constraint residual " + sci(residual) + " (<= 1e-8); maximality " +
             (mx.pass ? "holds" : "violated") + " over " + std::to_string(mx.perturbations) + " perturbations (S_fit - max S_pert = " +
             sci(mx.entropy_fit - mx.max_entropy_perturbed) + ")";
  return o;
}

Outcome closure_dynamics() {
  Desk d(3, 2, 0.5, 2);
  const CellObservables obs(*d.basis, d.model);
  const ClosureSystem sys(obs, *d.gen);
  LagrangeFields start = LagrangeFields::uniform(2, 0.1, 0.0);
  start.cells[1].beta = 0.12;
  const double tau0 = d.tau0();
  Outcome o;
  const double rate_p = closure_rhs(sys, start).dfields.norm();
  const double rate_u = closure_rhs(sys, LagrangeFields::uniform(2, 0.11, 0.0)).dfields.norm();
  const double stationarity = rate_u / rate_p;
  o.notes.push_back("tau0 = " + sci(tau0) + ", perturbed rate " + sci(rate_p) + ", uniform rate " + sci(rate_u));

  bool run_ok = false;
  double mass_drift = NAN, contrast_rise = NAN, entropy_drop = NAN, factor = NAN;
  try {
    const StateTrajectory tr = integrate(sys, start, 40 * tau0, 5 * tau0);
    mass_drift = tr.mass_drift();
    contrast_rise = 0.0;
    entropy_drop = 0.0;
    for (std::size_t i = 1; i < tr.points.size(); ++i) {
      contrast_rise = std::max(contrast_rise, tr.beta_contrast(i) - tr.beta_contrast(i - 1));
      entropy_drop = std::max(entropy_drop, tr.points[i - 1].entropy - tr.points[i].entropy);
    }
    run_ok = true;
  } catch (const std::exception& e) {
    o.notes.push_back(std::string("relaxation run at dt = 5 tau0 failed: ") + e.what());
  }
  try {
    std::vector<RealVector> ends;
    for (double m : {20.0, 10.0, 5.0}) ends.push_back(integrate(sys, start, 80 * tau0, m * tau0).points.back().fields.pack(1));
    factor = (ends[0] - ends[2]).norm() / (ends[1] - ends[2]).norm();
  } catch (const std::exception& e) {
    o.notes.push_back(std::string("convergence runs at dt = 20, 10, 5 tau0 failed: ") + e.what());
  }
  o.pass = run_ok && mass_drift <= 1e-8 && stationarity <= 1e-2 && factor >= 8.0 && contrast_rise <= 0.0 &&
           entropy_drop <= 1e-9;
  o.detail = "mass drift " + sci(mass_drift) + " (<= 1e-8); stationarity ratio " + sci(stationarity) +
             " (<= 1e-2); RK4 factor " + fmt("%.2f", factor) + " (>= 8); max beta-contrast rise " + sci(contrast_rise) +
             " (<= 0); max entropy drop " + sci(entropy_drop) + " (<= 1e-9)";
  return o;
}

Outcome microsystem() {
  FockBasis macro(3, 2, Statistics::Bose);
  const JointSpace js(macro, {3, 1});
  RandomSource rng(99);
  double trace = 0.0, charge = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Matrix rho_m = js.vacuum_embed(rng.density(macro.dim(), 3));
    const JointState st = embed_joint(js, rho_m, rng.density(3, 2));
    const Matrix a = rng.hermitian(3);
    trace = std::max(trace, std::abs(full_expectation(js, a, st) - reduce_expectation(a, st)));
    charge = std::max(charge, (js.charge() * st.rho - st.rho).norm());
  }
  return {trace <= 1e-12 && charge <= 1e-12,
          "100 instances: max |Tr(A_hat rho) - Tr(A rho1)| " + sci(trace) + " (<= 1e-12); |Q rho - rho| " + sci(charge) +
              " (<= 1e-12)",
          {}};
}

Outcome determinism() {
  const RunConfig cfg = parse_config(nlohmann::json{{"seed", 5}, {"cells", 2}, {"checks", {{"positivity_samples", 200}}}});
  bool same = true;
  std::string which;
  for (const std::string cmd : {"generator-check", "maxent", "micro-demo"}) {
    const RunOutput a = run_command(cmd, cfg), b = run_command(cmd, cfg);
    const bool eq = report_values(a.report).dump() == report_values(b.report).dump() && a.files == b.files;
    same = same && eq;
    which += cmd + (eq ? " identical; " : " DIFFERS; ");
  }
  return {same, which + "reports compared without the timing block", {}};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"1 algebra suite", algebra},
      {"2 resolvent identity", resolvent_identity},
      {"3 coarse-grained representation", coarse_grained},
      {"4 positivity", positivity},
      {"5 conservation", conservation},
      {"6 max-ent round trip", maxent_round_trip},
      {"7 closure dynamics", closure_dynamics},
      {"8 microsystem reduction", microsystem},
      {"9 determinism", determinism}};
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    if (!o.pass) ++failures;
    std::printf("%s [%s] %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    for (const std::string& n : o.notes) std::printf("       %s\n", n.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
