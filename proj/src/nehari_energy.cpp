#include "sbpp/nehari_energy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "sbpp/bopp_podolsky.hpp"
#include "sbpp/errors.hpp"

namespace sbpp {

namespace {

constexpr double kFourPi = 4.0 * std::numbers::pi;

double positive_power(double v, double q) { return v > 0.0 ? std::pow(v, q) : 0.0; }

Multiplier eps_weight(const TorusGrid& g, double eps) {
  const double e1 = 1.0 / eps;
  const double e3 = 1.0 / (eps * eps * eps);
  return Multiplier(g, [=](double s) { return e1 * s + e3; });
}

/// Shared spectral state of u: uhat, the source u^2 and phi_u's spectrum.
struct Spectra {
  Spectrum u_hat;
  Spectrum phi_hat;
  double coupling;  // int u^2 phi_u
};

Spectra spectra_of(const ScalarField& u, const SystemParams& P) {
  const Multiplier bp = bp_multiplier(u.grid(), P.a);
  Spectrum sq_hat = forward(nonlinear_product(u, u, P.dealiasing));
  // int u^2 phi_u = 4 pi vol sum m(s) |sq_hat|^2 by Parseval
  const double coupling = kFourPi * spectral_energy(sq_hat, bp);
  auto c = sq_hat.coefficients();
  for (auto& z : c) z *= kFourPi;
  apply_in_place(sq_hat, bp);
  return {forward(u), std::move(sq_hat), coupling};
}

}  // namespace

SystemParams SystemParams::checked(double p, double a, double epsilon, Dealiasing dealiasing) {
  SystemParams P{p, a, epsilon, dealiasing};
  P.validate();
  return P;
}

void SystemParams::validate() const {
  std::ostringstream msg;
  if (!(p > 4.0 && p < 6.0)) {
    msg << "p must lie in (4, 6), got " << p;
  } else if (!(a > 0.0 && a < 0.5)) {
    msg << "a must lie in (0, 1/2), got " << a;
  } else if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    msg << "epsilon must be positive, got " << epsilon;
  } else {
    return;
  }
  throw ParameterError(msg.str());
}

EnergyParts energy_parts(const ScalarField& u, const SystemParams& P) {
  P.validate();
  const double e3 = P.epsilon * P.epsilon * P.epsilon;
  const Multiplier bp = bp_multiplier(u.grid(), P.a);
  const Spectrum sq_hat = forward(nonlinear_product(u, u, P.dealiasing));
  const double pexp = P.p;
  EnergyParts parts{};
  parts.A = spectral_energy(forward(u), eps_weight(u.grid(), P.epsilon));
  parts.B = kFourPi * spectral_energy(sq_hat, bp) / e3;
  parts.C = integrate_nonlinear(u, [pexp](double v) { return positive_power(v, pexp); },
                                P.dealiasing) /
            e3;
  return parts;
}

double energy(const ScalarField& u, const SystemParams& P) {
  const EnergyParts e = energy_parts(u, P);
  return 0.5 * e.A + 0.25 * e.B - e.C / P.p;
}

double nehari_residual(const ScalarField& u, const SystemParams& P) {
  const EnergyParts e = energy_parts(u, P);
  return e.A + e.B - e.C;
}

double nehari_scaling(const EnergyParts& e, double p) {
  if (!(e.A > 0.0 && e.C > 0.0 && e.B >= 0.0 && p > 4.0)) {
    throw ProjectionUndefined("nehari_scaling: need A > 0, C > 0, B >= 0 and p > 4");
  }
  const double q = p - 2.0;
  auto g = [&](double t) { return e.A + e.B * t * t - e.C * std::pow(t, q); };
  auto dg = [&](double t) { return 2.0 * e.B * t - q * e.C * std::pow(t, q - 1.0); };
  double lo = 1e-6, hi = 1e6;
  if (!(g(lo) > 0.0) || !(g(hi) < 0.0)) {
    throw NumericalError("nehari_scaling: root outside [1e-6, 1e6]");
  }
  // Start at the root of A = C t^(p-2), which lies below the true root.
  double t = std::clamp(std::pow(e.A / e.C, 1.0 / q), lo, hi);
  for (int it = 0; it < 200; ++it) {
    const double gt = g(t);
    if (gt > 0.0) lo = t; else if (gt < 0.0) hi = t; else return t;
    const double slope = dg(t);
    double next = slope < 0.0 ? t - gt / slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - t) <= 1e-15 * t) return next;
    t = next;
    if (hi - lo <= 1e-15 * hi) return t;
  }
  return t;
}

NehariProjection project_nehari(const ScalarField& u, const SystemParams& P) {
  const EnergyParts e = energy_parts(u, P);
  if (!(e.C > 0.0)) {
    throw ProjectionUndefined("project_nehari: the positive part of u vanishes");
  }
  const double t = nehari_scaling(e, P.p);
  const double t2 = t * t;
  const double tp = std::pow(t, P.p);
  NehariProjection out{t, t * u, 0.0, 0.0};
  out.energy = 0.5 * t2 * e.A + 0.25 * t2 * t2 * e.B - tp * e.C / P.p;
  out.nehari_residual = t2 * e.A + t2 * t2 * e.B - tp * e.C;
  return out;
}

GradientEvaluation evaluate_gradient(const ScalarField& u, const SystemParams& P) {
  P.validate();
  const TorusGrid& g = u.grid();
  const double eps = P.epsilon;
  const double e2 = eps * eps;
  const double e3 = e2 * eps;
  const double pm1 = P.p - 1.0;

  const Spectra sp = spectra_of(u, P);
  const ScalarField phi = inverse(sp.phi_hat);
  const ScalarField nonlinear =
      nonlinear_product(phi, u, P.dealiasing) -
      nonlinear_map(u, [pm1](double v) { return positive_power(v, pm1); }, P.dealiasing);
  const Spectrum nl_hat = forward(nonlinear);

  // grad = u + (eps^2 s + 1)^-1 [phi u - (u^+)^(p-1)];  R = (eps^2 s + 1) u + [...]
  const Multiplier shift(g, [e2](double s) { return e2 * s + 1.0; });
  Spectrum grad_hat(g);
  Spectrum res_hat(g);
  {
    auto gh = grad_hat.coefficients();
    auto rh = res_hat.coefficients();
    const auto uh = sp.u_hat.coefficients();
    const auto nh = nl_hat.coefficients();
    grad_hat.for_each_mode([&](std::size_t idx, int mx, int my, int mz, double) {
      const double w = shift.at_shell(mx * mx + my * my + mz * mz);
      gh[idx] = uh[idx] + nh[idx] / w;
      rh[idx] = w * uh[idx] + nh[idx];
    });
  }
  const Multiplier one(g, [](double) { return 1.0; });
  const Multiplier shift_sq(g, [e2](double s) { return (e2 * s + 1.0) * (e2 * s + 1.0); });

  GradientEvaluation out{inverse(grad_hat), 0.0, 0.0, 0.0};
  out.gradient_norm = std::sqrt(spectral_energy(grad_hat, shift) / e3);
  out.field_norm = std::sqrt(spectral_energy(sp.u_hat, shift) / e3);
  const double linear = std::sqrt(spectral_energy(sp.u_hat, shift_sq));
  const double residual = std::sqrt(spectral_energy(res_hat, one));
  out.pde_residual = linear > 0.0 ? residual / linear : residual;
  return out;
}

ScalarField energy_gradient(const ScalarField& u, const SystemParams& P) {
  return evaluate_gradient(u, P).gradient;
}

double energy_derivative(const ScalarField& u, const ScalarField& h, const SystemParams& P) {
  P.validate();
  const double eps = P.epsilon;
  const double e3 = eps * eps * eps;
  const double pm1 = P.p - 1.0;
  const ScalarField phi = solve_phi(u, P.a, P.dealiasing);
  const ScalarField density =
      (-eps * eps) * laplacian(u) + u + nonlinear_product(phi, u, P.dealiasing) -
      nonlinear_map(u, [pm1](double v) { return positive_power(v, pm1); }, P.dealiasing);
  return integrate(density * h) / e3;
}

double energy_on_nehari(const ScalarField& u, const SystemParams& P, double rel_tol) {
  const EnergyParts e = energy_parts(u, P);
  const double residual = e.A + e.B - e.C;
  if (std::abs(residual) > rel_tol * e.A) {
    std::ostringstream msg;
    msg << "energy_on_nehari: field is off the Nehari set (N = " << residual
        << ", ‖u‖² = " << e.A << ")";
    throw ConsistencyError(msg.str());
  }
  return (0.5 - 1.0 / P.p) * e.A + (0.25 - 1.0 / P.p) * e.B;
}

}  // namespace sbpp
