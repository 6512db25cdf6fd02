#pragma once

#include "sbpp/grid_field.hpp"

namespace sbpp {

/// Bopp-Podolsky-Proca electrostatics with m = 1:
///   -Delta phi + a^2 Delta^2 phi + phi = 4 pi u^2.
/// On the torus the operator is diagonal with symbol s + a^2 s^2 + 1 >= 1.
struct BPParams {
  double a;

  /// Throws ParameterError unless 0 < a < 1/2.
  static BPParams checked(double a);
};

/// 1 / (s + a^2 s^2 + 1), the solution operator's symbol.
Multiplier bp_multiplier(const TorusGrid& grid, double a);

/// phi_u, the unique solution with source 4 pi u^2.
ScalarField solve_phi(const ScalarField& u, double a, Dealiasing mode = Dealiasing::none);

/// G(u) = int u^2 phi_u. Nonnegative, zero only for u = 0.
double coupling_energy(const ScalarField& u, double a, Dealiasing mode = Dealiasing::none);

/// Phi'(u)[h]: same operator with source 8 pi u h.
ScalarField phi_derivative(const ScalarField& u, const ScalarField& h, double a,
                           Dealiasing mode = Dealiasing::none);

/// Phi''[h, k]: source 8 pi h k. Independent of u since Phi is quadratic.
ScalarField phi_second_derivative(const ScalarField& h, const ScalarField& k, double a,
                                  Dealiasing mode = Dealiasing::none);

/// G'(u)[h] = 4 int phi_u u h.
double coupling_energy_derivative(const ScalarField& u, const ScalarField& h, double a,
                                  Dealiasing mode = Dealiasing::none);

/// ‖v‖²_{H²} = int (a^2 |Delta v|^2 + |grad v|^2 + v^2), evaluated spectrally.
double h2_norm_sq(const ScalarField& v, double a);

/// Relative residual of phi in the field equation with source 4 pi u^2,
/// measured in the dual norm sum |r(k)|^2 / (s + a^2 s^2 + 1).
double bp_residual(const ScalarField& phi, const ScalarField& u, double a,
                   Dealiasing mode = Dealiasing::none);

}  // namespace sbpp
