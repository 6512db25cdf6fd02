#include "sbpp/bopp_podolsky.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "sbpp/errors.hpp"

namespace sbpp {

namespace {

constexpr double kFourPi = 4.0 * std::numbers::pi;

ScalarField squared(const ScalarField& u, Dealiasing mode) {
  return nonlinear_product(u, u, mode);
}

}  // namespace

BPParams BPParams::checked(double a) {
  if (!(a > 0.0 && a < 0.5)) {
    std::ostringstream msg;
    msg << "Bopp-Podolsky parameter a must lie in (0, 1/2), got " << a;
    throw ParameterError(msg.str());
  }
  return BPParams{a};
}

Multiplier bp_multiplier(const TorusGrid& grid, double a) {
  const double a2 = BPParams::checked(a).a * a;
  return Multiplier(grid, [a2](double s) { return 1.0 / (s + a2 * s * s + 1.0); });
}

ScalarField solve_phi(const ScalarField& u, double a, Dealiasing mode) {
  return apply_multiplier(kFourPi * squared(u, mode), bp_multiplier(u.grid(), a));
}

double coupling_energy(const ScalarField& u, double a, Dealiasing mode) {
  const ScalarField sq = squared(u, mode);
  return integrate(sq * apply_multiplier(kFourPi * sq, bp_multiplier(u.grid(), a)));
}

ScalarField phi_derivative(const ScalarField& u, const ScalarField& h, double a,
                           Dealiasing mode) {
  return apply_multiplier(2.0 * kFourPi * nonlinear_product(u, h, mode),
                          bp_multiplier(u.grid(), a));
}

ScalarField phi_second_derivative(const ScalarField& h, const ScalarField& k, double a,
                                  Dealiasing mode) {
  return phi_derivative(h, k, a, mode);
}

double coupling_energy_derivative(const ScalarField& u, const ScalarField& h, double a,
                                  Dealiasing mode) {
  const ScalarField phi = solve_phi(u, a, mode);
  return 4.0 * integrate(h * nonlinear_product(phi, u, mode));
}

double h2_norm_sq(const ScalarField& v, double a) {
  const double a2 = BPParams::checked(a).a * a;
  return spectral_energy(forward(v),
                         Multiplier(v.grid(), [a2](double s) { return a2 * s * s + s + 1.0; }));
}

double bp_residual(const ScalarField& phi, const ScalarField& u, double a, Dealiasing mode) {
  // Dual-norm (H^-2) residual: both sides weighted by 1 / symbol, so the
  // fourth-order symbol does not amplify round-off in phi.
  const Multiplier inv_symbol = bp_multiplier(phi.grid(), a);
  const Spectrum source = forward(kFourPi * squared(u, mode));
  Spectrum lhs = forward(phi);
  apply_in_place(lhs, inv_symbol.reciprocal());
  auto c = lhs.coefficients();
  const auto f = source.coefficients();
  for (std::size_t i = 0; i < c.size(); ++i) c[i] -= f[i];
  const double num = spectral_energy(lhs, inv_symbol);
  const double denom = spectral_energy(source, inv_symbol);
  return denom > 0.0 ? std::sqrt(num / denom) : std::sqrt(num);
}

}  // namespace sbpp
