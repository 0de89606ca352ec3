#include <memory>
#include <sstream>

#include "doctest.h"
#include "qkin/kinetics.hpp"

using namespace qkin;

namespace {

struct Setup {
  FockBasis basis{3, 2, Statistics::Bose};
  FieldModel fm;
  std::unique_ptr<CellObservables> obs;
  std::unique_ptr<Generator> gen;
  std::unique_ptr<ClosureSystem> sys;
  Setup(int cells, bool collisions) {
    BoxGeometry line;
    fm = make_field_model(line, 3, Potential::gaussian(0.5, 0.1), CellGrid::uniform(line, cells), 24);
    obs = std::make_unique<CellObservables>(basis, fm);
    if (collisions) {
      const auto t = two_body_tmatrix(fm.modes, fm.pair_total, Statistics::Bose, Complex(0, 0.5), {0.5});
      gen = std::make_unique<Generator>(basis, build_coefficients(fm.modes, t, default_smearing_width(t.basis)));
    } else {
      gen = std::make_unique<Generator>(basis, free_coefficients(fm.modes, Statistics::Bose));
    }
    sys = std::make_unique<ClosureSystem>(*obs, *gen);
  }
};

LagrangeFields contrast() {
  LagrangeFields f = LagrangeFields::uniform(2, 0.1, 0.0);
  f.cells[1].beta = 0.12;
  return f;
}

}  // namespace

TEST_CASE("chain-rule matrix is the derivative of the statistics") {
  Setup s(2, true);
  const LagrangeFields f = contrast();
  const ClosureRhs r = closure_rhs(*s.sys, f);
  const RealVector x = f.pack(1);
  for (int j = 0; j < x.size(); ++j) {
    RealVector xp = x, xm = x;
    const double h = 1e-6;
    xp(j) += h;
    xm(j) -= h;
    const RealVector fd = (statistic_expectations(gibbs_state(*s.obs, LagrangeFields::unpack(xp, 2, 1)), *s.obs) -
                           statistic_expectations(gibbs_state(*s.obs, LagrangeFields::unpack(xm, 2, 1)), *s.obs)) /
                          (2 * h);
    CHECK((fd - r.m.col(j)).norm() < 1e-5 * std::max(1.0, fd.norm()));
  }
  CHECK((r.m * r.dfields - r.b).norm() < 1e-9 * std::max(1.0, r.b.norm()));
}

TEST_CASE("total number rate vanishes in every Gibbs state") {
  Setup s(2, true);
  const auto g = gibbs_state(*s.obs, contrast());
  const ClosureRhs r = closure_rhs(*s.sys, g);
  const int pc = s.obs->per_cell();
  CHECK(std::abs(r.b(pc - 1) + r.b(2 * pc - 1)) < 1e-10);
  const GainLossReport gl = gain_loss_report(*s.sys, g);
  CHECK(std::abs(gl.mass.total()) < 1e-10);
  for (int i = 0; i < s.obs->count(); ++i) CHECK(gl.statistics[i].total() == doctest::Approx(r.b(i)).epsilon(1e-9).scale(1e-9));
}

TEST_CASE("a single free cell is stationary") {
  Setup s(1, false);
  const ClosureRhs r = closure_rhs(*s.sys, LagrangeFields::uniform(1, 0.1, 0.0));
  CHECK(r.b.norm() < 1e-10);
  CHECK(r.dfields.norm() < 1e-10);
}

TEST_CASE("integrator enforces its step bounds") {
  Setup s(2, true);
  const double tau0 = *s.sys->tau0();
  CHECK_THROWS_AS(integrate(*s.sys, contrast(), 100 * tau0, tau0), PreconditionError);
  CHECK_THROWS_AS(integrate(*s.sys, contrast(), 10 * tau0, 5 * tau0), PreconditionError);
  CHECK_THROWS_AS(integrate(*s.sys, contrast(), -1.0, 1.0), PreconditionError);
}

TEST_CASE("free two-cell streaming conserves mass and converges at fourth order") {
  Setup s(2, false);
  const double span = 0.2;
  std::vector<RealVector> ends;
  for (int steps : {4, 8, 16}) {
    const StateTrajectory tr = integrate(*s.sys, contrast(), span, span / steps);
    CHECK(tr.mass_drift() < 1e-10);
    CHECK(tr.points.back().t == doctest::Approx(span));
    ends.push_back(tr.points.back().fields.pack(1));
  }
  const double e1 = (ends[0] - ends[2]).norm(), e2 = (ends[1] - ends[2]).norm();
  REQUIRE(e2 > 0);
  CHECK(e1 / e2 > 8.0);
}

TEST_CASE("trajectory CSV has one header and one row per point") {
  Setup s(2, false);
  const StateTrajectory tr = integrate(*s.sys, contrast(), 0.02, 0.005);
  std::ostringstream out;
  write_trajectory_csv(tr, 1, out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line.rfind("t,beta_0,mu_0,vx_0", 0) == 0);
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == static_cast<int>(tr.points.size()));
}
