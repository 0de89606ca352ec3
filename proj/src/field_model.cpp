#include "qkin/field_model.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "qkin/quadrature.hpp"

namespace qkin {

double BoxGeometry::volume() const {
  double v = 1.0;
  for (int a = 0; a < axes(); ++a) v *= lengths[a];
  return v;
}

void BoxGeometry::validate() const {
  for (int a = 0; a < axes(); ++a)
    if (!(lengths[a] > 0.0) || !std::isfinite(lengths[a]))
      throw PreconditionError("BoxGeometry: side lengths must be finite and > 0");
}

std::vector<Mode> box_modes(const BoxGeometry& geom, int count) {
  geom.validate();
  if (count < 1) throw PreconditionError("box_modes: mode count must be >= 1");
  const double scale = kHbar * kHbar * kPi * kPi / (2.0 * kMass);
  std::vector<Mode> all;
  if (geom.dimension == Dimension::One) {
    for (int n = 1; n <= count; ++n) {
      const double k = n / geom.lengths[0];
      all.push_back({{n, 0, 0}, scale * k * k});
    }
    return all;
  }
  for (int a = 1; a <= count; ++a)
    for (int b = 1; b <= count; ++b)
      for (int c = 1; c <= count; ++c) {
        const double e = scale * (std::pow(a / geom.lengths[0], 2) + std::pow(b / geom.lengths[1], 2) +
                                  std::pow(c / geom.lengths[2], 2));
        all.push_back({{a, b, c}, e});
      }
  // Degenerate levels are listed with the larger leading quantum number first.
  std::sort(all.begin(), all.end(), [](const Mode& x, const Mode& y) {
    if (std::abs(x.energy - y.energy) > 1e-12 * std::max(x.energy, y.energy)) return x.energy < y.energy;
    return x.quantum > y.quantum;
  });
  all.resize(count);
  return all;
}

namespace {

double sine_mode(int n, double x, double length) {
  return std::sqrt(2.0 / length) * std::sin(n * kPi * x / length);
}

double sine_mode_derivative(int n, double x, double length) {
  return std::sqrt(2.0 / length) * (n * kPi / length) * std::cos(n * kPi * x / length);
}

// Integrals of sine-mode products over [a, b] along one axis.
struct AxisIntegrals {
  RealMatrix overlap;     // int s_n s_m
  RealMatrix gradient;    // int s_n' s_m'
  RealMatrix antisym;     // int (s_n s_m' - s_n' s_m)
};

AxisIntegrals axis_integrals(int nmax, double a, double b, double length) {
  const int order = 40 + 4 * nmax;
  const auto rule = gauss_legendre(order, a, b);
  AxisIntegrals out{RealMatrix::Zero(nmax + 1, nmax + 1), RealMatrix::Zero(nmax + 1, nmax + 1),
                    RealMatrix::Zero(nmax + 1, nmax + 1)};
  for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
    const double x = rule.nodes[q], w = rule.weights[q];
    for (int n = 1; n <= nmax; ++n) {
      const double sn = sine_mode(n, x, length), dn = sine_mode_derivative(n, x, length);
      for (int m = 1; m <= nmax; ++m) {
        const double sm = sine_mode(m, x, length), dm = sine_mode_derivative(m, x, length);
        out.overlap(n, m) += w * sn * sm;
        out.gradient(n, m) += w * dn * dm;
        out.antisym(n, m) += w * (sn * dm - dn * sm);
      }
    }
  }
  return out;
}

// Full-interval integrals are known in closed form.
AxisIntegrals axis_integrals_full(int nmax, double length) {
  AxisIntegrals out = axis_integrals(nmax, 0.0, length, length);
  for (int n = 1; n <= nmax; ++n)
    for (int m = 1; m <= nmax; ++m) {
      out.overlap(n, m) = n == m ? 1.0 : 0.0;
      out.gradient(n, m) = n == m ? std::pow(n * kPi / length, 2) : 0.0;
    }
  return out;
}

int max_quantum(const std::vector<Mode>& modes) {
  int m = 1;
  for (const auto& md : modes)
    for (int q : md.quantum) m = std::max(m, q);
  return m;
}

// Quadrature point cloud with mode values, used for pair integrals.
struct PointSet {
  std::vector<std::array<double, 3>> points;
  std::vector<double> weights;
};

PointSet slab_points(const BoxGeometry& geom, double x0, double x1, int order) {
  PointSet ps;
  const auto rx = gauss_legendre(order, x0, x1);
  if (geom.dimension == Dimension::One) {
    for (std::size_t i = 0; i < rx.nodes.size(); ++i) {
      ps.points.push_back({rx.nodes[i], 0.0, 0.0});
      ps.weights.push_back(rx.weights[i]);
    }
    return ps;
  }
  const auto ry = gauss_legendre(order, 0.0, geom.lengths[1]);
  const auto rz = gauss_legendre(order, 0.0, geom.lengths[2]);
  for (std::size_t i = 0; i < rx.nodes.size(); ++i)
    for (std::size_t j = 0; j < ry.nodes.size(); ++j)
      for (std::size_t k = 0; k < rz.nodes.size(); ++k) {
        ps.points.push_back({rx.nodes[i], ry.nodes[j], rz.nodes[k]});
        ps.weights.push_back(rx.weights[i] * ry.weights[j] * rz.weights[k]);
      }
  return ps;
}

PointSet composite_points(const BoxGeometry& geom, const CellGrid& cells, int order) {
  PointSet all;
  for (int c = 0; c < cells.size(); ++c) {
    auto ps = slab_points(geom, cells.boundaries[c], cells.boundaries[c + 1], order);
    all.points.insert(all.points.end(), ps.points.begin(), ps.points.end());
    all.weights.insert(all.weights.end(), ps.weights.begin(), ps.weights.end());
  }
  return all;
}

// Rows: quadrature points; columns: (a, b) mode pairs, a*F + b; entries w u_a u_b.
RealMatrix pair_products(const BoxGeometry& geom, const std::vector<Mode>& modes, const PointSet& ps) {
  const int F = static_cast<int>(modes.size());
  RealMatrix out(ps.points.size(), F * F);
  std::vector<double> u(F);
  for (std::size_t p = 0; p < ps.points.size(); ++p) {
    for (int f = 0; f < F; ++f) u[f] = mode_value(geom, modes[f], ps.points[p]);
    for (int a = 0; a < F; ++a)
      for (int b = 0; b < F; ++b) out(p, a * F + b) = ps.weights[p] * u[a] * u[b];
  }
  return out;
}

double distance(const std::array<double, 3>& x, const std::array<double, 3>& y, int axes) {
  double s = 0.0;
  for (int a = 0; a < axes; ++a) s += (x[a] - y[a]) * (x[a] - y[a]);
  return std::sqrt(s);
}

void symmetrize(CTensor4& t) {
  const int F = t.modes();
  CTensor4 s(F);
  for (int a = 0; a < F; ++a)
    for (int b = 0; b < F; ++b)
      for (int c = 0; c < F; ++c)
        for (int d = 0; d < F; ++d) s(a, b, c, d) = 0.5 * (t(a, b, c, d) + t(b, a, d, c));
  for (int a = 0; a < F; ++a)
    for (int b = 0; b < F; ++b)
      for (int c = 0; c < F; ++c)
        for (int d = 0; d < F; ++d) t(a, b, c, d) = 0.5 * (s(a, b, c, d) + std::conj(s(d, c, b, a)));
}

// Pair tensor with the first particle restricted to the slab [x0, x1].
CTensor4 slab_pair_tensor(const BoxGeometry& geom, const std::vector<Mode>& modes, const Potential& v,
                          const CellGrid& cells, double x0, double x1, int order) {
  const int F = static_cast<int>(modes.size());
  CTensor4 t(F);
  if (v.kind == Potential::Kind::Zero) return t;
  const auto xs = slab_points(geom, x0, x1, order);
  const RealMatrix px = pair_products(geom, modes, xs);
  RealMatrix m(F * F, F * F);
  if (v.kind == Potential::Kind::Contact) {
    // delta(x - y): both particles at the same point.
    RealMatrix plain = px;
    for (std::size_t p = 0; p < xs.points.size(); ++p) plain.row(p) /= xs.weights[p];
    m = v.strength * px.transpose() * plain;
  } else {
    const auto ys = composite_points(geom, cells, order);
    const RealMatrix py = pair_products(geom, modes, ys);
    m.setZero();
    const std::size_t chunk = 512;
    for (std::size_t start = 0; start < xs.points.size(); start += chunk) {
      const std::size_t n = std::min(chunk, xs.points.size() - start);
      RealMatrix kern(n, ys.points.size());
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < ys.points.size(); ++j)
          kern(i, j) = v(distance(xs.points[start + i], ys.points[j], geom.axes()));
      m.noalias() += px.middleRows(start, n).transpose() * kern * py;
    }
  }
  // m(l1*F + f1, l2*F + f2)
  for (int l1 = 0; l1 < F; ++l1)
    for (int f1 = 0; f1 < F; ++f1)
      for (int l2 = 0; l2 < F; ++l2)
        for (int f2 = 0; f2 < F; ++f2) t(l1, l2, f2, f1) = m(l1 * F + f1, l2 * F + f2);
  return t;
}

}  // namespace

double mode_value(const BoxGeometry& geom, const Mode& mode, const std::array<double, 3>& x) {
  double u = 1.0;
  for (int a = 0; a < geom.axes(); ++a) u *= sine_mode(mode.quantum[a], x[a], geom.lengths[a]);
  return u;
}

double Potential::operator()(double r) const {
  switch (kind) {
    case Kind::Zero:
      return 0.0;
    case Kind::Gaussian:
      return strength * std::exp(-r * r / (2.0 * range * range));
    case Kind::SoftLennardJones: {
      const double rho = std::sqrt(r * r + core * core);
      const double s6 = std::pow(range / rho, 6);
      return 4.0 * strength * (s6 * s6 - s6);
    }
    case Kind::Contact:
      break;
  }
  throw PreconditionError("contact potential has no pointwise value");
}

Potential Potential::scaled(double factor) const {
  Potential p = *this;
  p.strength *= factor;
  return p;
}

void Potential::validate(const BoxGeometry& geom) const {
  if (!std::isfinite(strength)) throw PreconditionError("potential strength must be finite");
  if (kind == Kind::Contact && geom.dimension != Dimension::One)
    throw PreconditionError("contact potential is only supported in 1D");
  if ((kind == Kind::Gaussian || kind == Kind::SoftLennardJones) && !(range > 0.0))
    throw PreconditionError("potential range must be > 0");
  if (kind == Kind::SoftLennardJones && !(core > 0.0))
    throw PreconditionError("Lennard-Jones core radius must be > 0");
}

const char* to_string(Potential::Kind k) {
  switch (k) {
    case Potential::Kind::Zero: return "zero";
    case Potential::Kind::Gaussian: return "gaussian";
    case Potential::Kind::SoftLennardJones: return "soft_lennard_jones";
    case Potential::Kind::Contact: return "contact";
  }
  return "?";
}

CellGrid CellGrid::uniform(const BoxGeometry& geom, int cells) {
  if (cells < 1) throw PreconditionError("CellGrid: need at least one cell");
  CellGrid g;
  for (int i = 0; i <= cells; ++i) g.boundaries.push_back(geom.lengths[0] * i / cells);
  return g;
}

void CellGrid::validate(const BoxGeometry& geom) const {
  if (boundaries.size() < 2) throw PreconditionError("CellGrid: need at least one cell");
  if (std::abs(boundaries.front()) > 1e-14 || std::abs(boundaries.back() - geom.lengths[0]) > 1e-14)
    throw PreconditionError("CellGrid: cells must cover the box");
  for (std::size_t i = 1; i < boundaries.size(); ++i)
    if (!(boundaries[i] > boundaries[i - 1])) throw PreconditionError("CellGrid: boundaries must increase");
}

PotentialTensorResult potential_tensor(const BoxGeometry& geom, const std::vector<Mode>& modes,
                                       const Potential& v, int order, double tolerance) {
  if (order < 2) throw PreconditionError("potential_tensor: quadrature order must be >= 2");
  v.validate(geom);
  const CellGrid whole = CellGrid::uniform(geom, 1);
  PotentialTensorResult r;
  r.tensor = slab_pair_tensor(geom, modes, v, whole, 0.0, geom.lengths[0], order);
  const CTensor4 fine = slab_pair_tensor(geom, modes, v, whole, 0.0, geom.lengths[0], 2 * order);
  symmetrize(r.tensor);
  r.error_estimate = (r.tensor - fine).max_abs();
  if (r.error_estimate > tolerance)
    throw NumericalError("potential_tensor: quadrature error estimate " + std::to_string(r.error_estimate) +
                         " exceeds tolerance; raise the quadrature order");
  return r;
}

Matrix FieldModel::mode_energies() const {
  Matrix w = Matrix::Zero(mode_count(), mode_count());
  for (int f = 0; f < mode_count(); ++f) w(f, f) = modes[f].energy;
  return w;
}

FieldModel make_field_model(const BoxGeometry& geom, int mode_count, const Potential& v, const CellGrid& cells,
                            int order, double tolerance) {
  geom.validate();
  v.validate(geom);
  cells.validate(geom);
  if (order < 2) throw PreconditionError("quadrature order must be >= 2");
  FieldModel m;
  m.geometry = geom;
  m.modes = box_modes(geom, mode_count);
  m.potential = v;
  m.cells = cells;
  m.quadrature_order = order;

  const int F = mode_count;
  const int nmax = max_quantum(m.modes);
  std::array<AxisIntegrals, 3> full;
  for (int a = 0; a < geom.axes(); ++a) full[a] = axis_integrals_full(nmax, geom.lengths[a]);

  const Complex minus_i_half(0.0, -0.5 * kHbar);
  for (int c = 0; c < cells.size(); ++c) {
    const AxisIntegrals xi = axis_integrals(nmax, cells.boundaries[c], cells.boundaries[c + 1], geom.lengths[0]);
    Matrix ov = Matrix::Zero(F, F), kin = Matrix::Zero(F, F);
    std::array<Matrix, 3> mom{Matrix::Zero(F, F), Matrix::Zero(F, F), Matrix::Zero(F, F)};
    for (int h = 0; h < F; ++h)
      for (int k = 0; k < F; ++k) {
        const auto& qh = m.modes[h].quantum;
        const auto& qk = m.modes[k].quantum;
        auto delta_except = [&](int skip1, int skip2) {
          for (int a = 1; a < geom.axes(); ++a)
            if (a != skip1 && a != skip2 && qh[a] != qk[a]) return 0.0;
          return 1.0;
        };
        const double sx = xi.overlap(qh[0], qk[0]);
        ov(h, k) = sx * delta_except(-1, -1);
        double grad = xi.gradient(qh[0], qk[0]) * delta_except(-1, -1);
        for (int a = 1; a < geom.axes(); ++a) grad += sx * full[a].gradient(qh[a], qk[a]) * delta_except(a, -1);
        kin(h, k) = kHbar * kHbar / (2.0 * kMass) * grad;
        mom[0](h, k) = minus_i_half * xi.antisym(qh[0], qk[0]) * delta_except(-1, -1);
        for (int a = 1; a < geom.axes(); ++a)
          mom[a](h, k) = minus_i_half * sx * full[a].antisym(qh[a], qk[a]) * delta_except(a, -1);
      }
    m.overlap.push_back(ov);
    m.kinetic.push_back(kin);
    m.momentum.push_back(mom);
  }

  m.pair_total = CTensor4(F);
  double err = 0.0;
  for (int c = 0; c < cells.size(); ++c) {
    CTensor4 t = slab_pair_tensor(geom, m.modes, v, cells, cells.boundaries[c], cells.boundaries[c + 1], order);
    if (v.kind != Potential::Kind::Zero) {
      const CTensor4 fine =
          slab_pair_tensor(geom, m.modes, v, cells, cells.boundaries[c], cells.boundaries[c + 1], 2 * order);
      err = std::max(err, (t - fine).max_abs());
    }
    symmetrize(t);
    m.pair_total += t;
    m.pair.push_back(std::move(t));
  }
  m.quadrature_error = err;
  if (err > tolerance)
    throw NumericalError("make_field_model: pair-tensor quadrature error " + std::to_string(err) +
                         " exceeds tolerance; raise the quadrature order");
  return m;
}

FieldModel rescale_potential(const FieldModel& model, double factor) {
  FieldModel m = model;
  m.potential = model.potential.scaled(factor);
  for (auto& t : m.pair) t *= Complex(factor);
  m.pair_total *= Complex(factor);
  return m;
}

Matrix free_hamiltonian(const FockBasis& basis, const FieldModel& model) {
  return one_body_operator(basis, model.mode_energies());
}

Matrix hamiltonian(const FockBasis& basis, const std::vector<Mode>& modes, const CTensor4& v) {
  const int F = static_cast<int>(modes.size());
  if (basis.mode_count() != F || v.modes() != F) throw PreconditionError("hamiltonian: inconsistent mode counts");
  Matrix w = Matrix::Zero(F, F);
  for (int f = 0; f < F; ++f) w(f, f) = modes[f].energy;
  return one_body_operator(basis, w) + two_body_operator(basis, v);
}

Matrix hamiltonian(const FockBasis& basis, const FieldModel& model) {
  return hamiltonian(basis, model.modes, model.pair_total);
}

Matrix mass_operator(const FockBasis& basis) { return kMass * number_op(basis); }

namespace {
void check_cell(const FieldModel& model, int cell) {
  if (cell < 0 || cell >= model.cells.size()) throw PreconditionError("cell index out of range");
}
}  // namespace

Matrix mass_density_op(const FockBasis& basis, const FieldModel& model, int cell) {
  check_cell(model, cell);
  return one_body_operator(basis, kMass * model.overlap[cell]);
}

Matrix energy_density_coefficients(const FieldModel& model, int cell, const Velocity& v) {
  check_cell(model, cell);
  // (1/2m)|(-i hbar grad - m v) u|^2 = kinetic - v.P + (m v^2/2) overlap
  Matrix e = model.kinetic[cell];
  double v2 = 0.0;
  for (int a = 0; a < model.geometry.axes(); ++a) {
    e -= v[a] * model.momentum[cell][a];
    v2 += v[a] * v[a];
  }
  e += 0.5 * kMass * v2 * model.overlap[cell];
  return e;
}

Matrix momentum_density_coefficients(const FieldModel& model, int cell, int axis, const Velocity& v) {
  check_cell(model, cell);
  if (axis < 0 || axis >= model.geometry.axes()) throw PreconditionError("axis out of range");
  return model.momentum[cell][axis] - kMass * v[axis] * model.overlap[cell];
}

Matrix energy_density_op(const FockBasis& basis, const FieldModel& model, int cell, const Velocity& v,
                         bool include_pair) {
  Matrix op = one_body_operator(basis, energy_density_coefficients(model, cell, v));
  if (include_pair && model.potential.kind != Potential::Kind::Zero)
    op += two_body_operator(basis, model.pair[cell]);
  return op;
}

std::vector<Matrix> momentum_density_op(const FockBasis& basis, const FieldModel& model, int cell,
                                        const Velocity& v) {
  std::vector<Matrix> out;
  for (int a = 0; a < model.geometry.axes(); ++a)
    out.push_back(one_body_operator(basis, momentum_density_coefficients(model, cell, a, v)));
  return out;
}

PhaseSpaceResult phase_space_op(const FockBasis& basis, const FieldModel& model, const std::array<double, 3>& x,
                                const std::array<double, 3>& p, double sigma) {
  if (!(sigma > 0.0)) throw PreconditionError("phase_space_op: sigma must be > 0");
  const auto& geom = model.geometry;
  const int F = model.mode_count();
  const int nmax = max_quantum(model.modes);
  PhaseSpaceResult r;
  r.packet_norm = 1.0;
  // Per-axis overlaps int s_n(x) g(x) dx of the separable packet.
  std::array<std::vector<Complex>, 3> ov;
  for (int a = 0; a < geom.axes(); ++a) {
    const auto rule = gauss_legendre(200 + 8 * nmax, 0.0, geom.lengths[a]);
    ov[a].assign(nmax + 1, Complex(0));
    double norm = 0.0;
    const double pref = std::pow(2.0 * kPi * sigma * sigma, -0.25);
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const double s = rule.nodes[q];
      const Complex g = pref * std::exp(Complex(-(s - x[a]) * (s - x[a]) / (4.0 * sigma * sigma), p[a] * s / kHbar));
      norm += rule.weights[q] * std::norm(g);
      for (int n = 1; n <= nmax; ++n) ov[a][n] += rule.weights[q] * sine_mode(n, s, geom.lengths[a]) * g;
    }
    r.packet_norm *= norm;
  }
  if (r.packet_norm < 0.99)
    r.warning = "packet normalization inside the box is " + std::to_string(r.packet_norm) + " (deficit " +
                std::to_string(1.0 - r.packet_norm) + ")";
  Vector amp(F);
  for (int f = 0; f < F; ++f) {
    Complex c = 1.0;
    for (int a = 0; a < geom.axes(); ++a) c *= ov[a][model.modes[f].quantum[a]];
    amp(f) = c / std::sqrt(r.packet_norm);
  }
  const double density = std::pow(2.0 * kPi * kHbar, -geom.axes());
  // <u_h|g><g|u_k>
  r.one_body = kMass * density * (amp * amp.adjoint());
  r.op = one_body_operator(basis, r.one_body);
  return r;
}

std::pair<double, double> mode_sum_vs_continuum(const BoxGeometry& geom, int mode_count, double x,
                                                double (*h)(double)) {
  if (geom.dimension != Dimension::One) throw PreconditionError("mode_sum_vs_continuum: 1D only");
  const double L = geom.lengths[0];
  double discrete = 0.0;
  for (int n = 1; n <= mode_count; ++n) {
    const double k = n * kPi / L;
    discrete += h(kHbar * kHbar * k * k / (2.0 * kMass)) * std::pow(sine_mode(n, x, L), 2);
  }
  // Mode density L/pi in k, same truncation kmax.
  const double kmax = (mode_count + 0.5) * kPi / L;
  const auto rule = gauss_legendre(400, 0.0, kmax);
  double continuum = 0.0;
  for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
    const double k = rule.nodes[q];
    continuum += rule.weights[q] * (L / kPi) * h(kHbar * kHbar * k * k / (2.0 * kMass)) * (2.0 / L) *
                 std::pow(std::sin(k * x), 2);
  }
  return {discrete, continuum};
}

}  // namespace qkin
