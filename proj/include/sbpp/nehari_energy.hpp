#pragma once

#include "sbpp/grid_field.hpp"

namespace sbpp {

/// Coefficients of the system with omega = q = m = 1.
struct SystemParams {
  double p;
  double a;
  double epsilon;
  Dealiasing dealiasing = Dealiasing::none;

  /// Throws ParameterError unless 4 < p < 6, 0 < a < 1/2 and epsilon > 0.
  static SystemParams checked(double p, double a, double epsilon,
                              Dealiasing dealiasing = Dealiasing::none);
  void validate() const;
};

/// The three scalars that fix J_eps and N_eps along the ray {t u}:
///   A = ‖u‖²_eps, B = (1/eps^3) int phi_u u^2, C = |u^+|^p_{p,eps}.
/// Because Phi(t u) = t^2 Phi(u), N_eps(t u) = A t^2 + B t^4 - C t^p.
struct EnergyParts {
  double A;
  double B;
  double C;
};

EnergyParts energy_parts(const ScalarField& u, const SystemParams& P);

/// J_eps(u) = A/2 + B/4 - C/p.
double energy(const ScalarField& u, const SystemParams& P);
/// N_eps(u) = J'_eps(u)[u] = A + B - C.
double nehari_residual(const ScalarField& u, const SystemParams& P);

struct NehariProjection {
  double t;
  ScalarField field;  // t * u
  double energy;
  double nehari_residual;
};

/// Unique positive zero of A + B t^2 - C t^(p-2): safeguarded Newton on the
/// bracket [1e-6, 1e6]. Requires A > 0, C > 0, B >= 0, p > 4.
double nehari_scaling(const EnergyParts& parts, double p);

/// Scales u onto the Nehari set. Throws ProjectionUndefined if u^+ vanishes.
NehariProjection project_nehari(const ScalarField& u, const SystemParams& P);

/// Everything one descent step needs at a point u.
struct GradientEvaluation {
  /// Riesz representative of J'_eps(u) in <.,.>_eps.
  ScalarField gradient;
  /// ‖gradient‖_eps.
  double gradient_norm;
  /// ‖u‖_eps.
  double field_norm;
  /// ‖-eps^2 Lap u + u + phi_u u - (u^+)^(p-1)‖_2 / ‖-eps^2 Lap u + u‖_2.
  double pde_residual;
};

GradientEvaluation evaluate_gradient(const ScalarField& u, const SystemParams& P);

/// Sobolev gradient: <grad(u), h>_eps = J'_eps(u)[h] for every band-limited h.
ScalarField energy_gradient(const ScalarField& u, const SystemParams& P);

/// J'_eps(u)[h] evaluated from the L2 density.
double energy_derivative(const ScalarField& u, const ScalarField& h, const SystemParams& P);

/// Reduced form valid on the Nehari set:
///   (1/2 - 1/p) ‖u‖²_eps + (1/4 - 1/p) (1/eps^3) int phi_u u^2.
/// Throws ConsistencyError if |N_eps(u)| > rel_tol * ‖u‖²_eps.
double energy_on_nehari(const ScalarField& u, const SystemParams& P, double rel_tol = 1e-9);

}  // namespace sbpp
