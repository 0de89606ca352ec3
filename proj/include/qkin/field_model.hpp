#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "qkin/fock.hpp"
#include "qkin/types.hpp"

namespace qkin {

enum class Dimension { One = 1, Three = 3 };

struct BoxGeometry {
  Dimension dimension = Dimension::One;
  std::array<double, 3> lengths{1.0, 1.0, 1.0};

  int axes() const { return static_cast<int>(dimension); }
  double volume() const;
  void validate() const;
};

/// Dirichlet eigenmode of the box. Unused quantum numbers are 0 in 1D.
struct Mode {
  std::array<int, 3> quantum{0, 0, 0};
  double energy = 0.0;
};

/// The F lowest Dirichlet modes; degenerate levels list the larger leading
/// quantum number first.
std::vector<Mode> box_modes(const BoxGeometry& geom, int count);

/// Normalized u_f and its gradient at a point.
double mode_value(const BoxGeometry& geom, const Mode& mode, const std::array<double, 3>& x);

struct Potential {
  enum class Kind { Zero, Gaussian, SoftLennardJones, Contact };
  Kind kind = Kind::Zero;
  double strength = 0.0;  // g for Gaussian/Contact, epsilon for Lennard-Jones
  double range = 0.1;     // sigma_V or sigma_LJ
  double core = 0.05;     // core regularization radius r_c (Lennard-Jones)

  static Potential zero() { return {}; }
  static Potential gaussian(double g, double sigma) { return {Kind::Gaussian, g, sigma, 0.0}; }
  static Potential contact(double g) { return {Kind::Contact, g, 0.0, 0.0}; }
  static Potential soft_lennard_jones(double eps, double sigma, double rc) {
    return {Kind::SoftLennardJones, eps, sigma, rc};
  }

  /// V(r); finite for every r >= 0. Contact is a delta and has no pointwise value.
  double operator()(double r) const;
  Potential scaled(double factor) const;
  void validate(const BoxGeometry& geom) const;
};

const char* to_string(Potential::Kind k);

/// Partition of the box into slabs along the first axis.
struct CellGrid {
  std::vector<double> boundaries;  // x_0 = 0 < x_1 < ... < x_N = L_x

  static CellGrid uniform(const BoxGeometry& geom, int cells);
  int size() const { return static_cast<int>(boundaries.size()) - 1; }
  void validate(const BoxGeometry& geom) const;
};

using Velocity = std::array<double, 3>;
using VelocityField = std::vector<Velocity>;

struct PotentialTensorResult {
  CTensor4 tensor;
  double error_estimate = 0.0;  // max entry difference between orders q and 2q
};

/// V_{l1 l2 f2 f1} = int u_{l1}(x) u_{l2}(y) V(|x-y|) u_{f2}(y) u_{f1}(x) by
/// Gauss-Legendre product quadrature, exchange-symmetrized. Throws
/// NumericalError when the q/2q error estimate exceeds `tolerance`.
PotentialTensorResult potential_tensor(const BoxGeometry& geom, const std::vector<Mode>& modes,
                                       const Potential& v, int order, double tolerance = 1e-8);

/// Bundle of everything the density observables need, precomputed once.
///
/// Per-cell one-body matrices are F x F in the mode basis:
///   overlap[c](h,k)  = int_c u_h u_k
///   kinetic[c](h,k)  = (hbar^2/2m) int_c grad u_h . grad u_k
///   momentum[c][a]   = (-i hbar/2) int_c (u_h d_a u_k - d_a u_h u_k)
///   pair[c]          = pair tensor with the first particle restricted to c
/// The pair tensors sum over cells to `pair_total`, which is what the
/// Hamiltonian uses, so the cell decompositions are exact identities.
struct FieldModel {
  BoxGeometry geometry;
  std::vector<Mode> modes;
  Potential potential;
  CellGrid cells;
  int quadrature_order = 24;

  std::vector<Matrix> overlap;
  std::vector<Matrix> kinetic;
  std::vector<std::array<Matrix, 3>> momentum;
  std::vector<CTensor4> pair;
  CTensor4 pair_total;
  double quadrature_error = 0.0;

  int mode_count() const { return static_cast<int>(modes.size()); }
  Matrix mode_energies() const;  // diag(W_f)
};

FieldModel make_field_model(const BoxGeometry& geom, int mode_count, const Potential& v,
                            const CellGrid& cells, int order = 24, double tolerance = 1e-8);

/// Same geometry and cells with the potential rescaled by `factor`.
FieldModel rescale_potential(const FieldModel& model, double factor);

Matrix free_hamiltonian(const FockBasis& basis, const FieldModel& model);
Matrix hamiltonian(const FockBasis& basis, const FieldModel& model);
Matrix hamiltonian(const FockBasis& basis, const std::vector<Mode>& modes, const CTensor4& v);
Matrix mass_operator(const FockBasis& basis);

Matrix mass_density_op(const FockBasis& basis, const FieldModel& model, int cell);

/// Cell-integrated rest-frame energy density for the cell velocity v.
/// `include_pair = false` keeps only the one-body (kinetic) part.
Matrix energy_density_op(const FockBasis& basis, const FieldModel& model, int cell, const Velocity& v,
                         bool include_pair = true);

/// Cell-integrated rest-frame momentum density, one matrix per axis.
std::vector<Matrix> momentum_density_op(const FockBasis& basis, const FieldModel& model, int cell,
                                        const Velocity& v);

/// One-body coefficient matrices behind the cell observables (F x F).
Matrix energy_density_coefficients(const FieldModel& model, int cell, const Velocity& v);
Matrix momentum_density_coefficients(const FieldModel& model, int cell, int axis, const Velocity& v);

struct PhaseSpaceResult {
  Matrix op;
  Matrix one_body;          // m <u_h|F(x,p)|u_k>
  double packet_norm = 1.0;  // norm^2 of the untruncated packet inside the box
  std::optional<std::string> warning;
};

/// Husimi-type phase-space density built on a Gaussian packet of width
/// sigma centred at (x, p), truncated to the box and renormalized.
PhaseSpaceResult phase_space_op(const FockBasis& basis, const FieldModel& model, const std::array<double, 3>& x,
                                const std::array<double, 3>& p, double sigma);

/// Diagnostic: local spectral sum sum_f h(W_f) u_f(x)^2 in 1D against its
/// plane-wave continuum estimate. Returns {discrete, continuum}.
std::pair<double, double> mode_sum_vs_continuum(const BoxGeometry& geom, int mode_count, double x,
                                                double (*h)(double));

}  // namespace qkin
