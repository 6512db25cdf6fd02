#include <doctest.h>

#include <cmath>
#include <numbers>

#include "sbpp/bopp_podolsky.hpp"
#include "sbpp/errors.hpp"
#include "sbpp/nehari_energy.hpp"
#include "test_support.hpp"

using namespace sbpp;
using sbpp::testing::kTwoPi;
using sbpp::testing::max_abs_diff;
using sbpp::testing::smooth_random;

namespace {
constexpr double kPi = std::numbers::pi;

template <class F>
double bisect(F f, double lo, double hi) {
  const bool rising = f(hi) > 0.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if ((f(mid) > 0.0) == rising) hi = mid; else lo = mid;
  }
  return 0.5 * (lo + hi);
}
}  // namespace

TEST_CASE("parameter validation") {
  CHECK_NOTHROW(SystemParams::checked(5.0, 0.25, 0.3));
  CHECK_THROWS_AS(SystemParams::checked(4.0, 0.25, 0.3), ParameterError);
  CHECK_THROWS_AS(SystemParams::checked(6.0, 0.25, 0.3), ParameterError);
  CHECK_THROWS_AS(SystemParams::checked(5.0, 0.5, 0.3), ParameterError);
  CHECK_THROWS_AS(SystemParams::checked(5.0, 0.25, 0.0), ParameterError);
  const TorusGrid g(8, 1.0);
  CHECK_THROWS_AS(energy(ScalarField::constant(g, 1.0), SystemParams{3.0, 0.25, 1.0}),
                  ParameterError);
}

TEST_CASE("energy and residual on constant fields") {
  const TorusGrid g(8, 3.0);
  const double vol = g.volume();
  for (double eps : {1.0, 0.4}) {
    const auto P = SystemParams::checked(5.0, 0.25, eps);
    const double e3 = eps * eps * eps;
    const auto zero = ScalarField::constant(g, 0.0);
    CHECK(energy(zero, P) == 0.0);
    CHECK(nehari_residual(zero, P) == 0.0);

    const auto minus = ScalarField::constant(g, -1.0);
    CHECK(energy(minus, P) == doctest::Approx(0.5 * vol / e3 + 4 * kPi * vol / (4 * e3)).epsilon(1e-13));
    CHECK(nehari_residual(minus, P) ==
          doctest::Approx(norm_eps_sq(minus, eps) + 4 * kPi * vol / e3).epsilon(1e-13));

    // c^3 - 4 pi c^2 - 1 = 0 puts the constant on the Nehari set
    const double c = bisect([](double x) { return x * x * x - 4 * kPi * x * x - 1.0; }, 4 * kPi, 20.0);
    const auto cf = ScalarField::constant(g, c);
    const EnergyParts parts = energy_parts(cf, P);
    CHECK(std::abs(nehari_residual(cf, P)) < 1e-12 * parts.A * c * c * c);
    const double expected = vol / e3 * (c * c / 4 + (0.25 - 0.2) * std::pow(c, 5.0));
    CHECK(energy(cf, P) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(energy_on_nehari(cf, P, 1e-10) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("scalar Nehari root") {
  CHECK(nehari_scaling({1.0, 0.0, 1.0}, 5.0) == doctest::Approx(1.0).epsilon(1e-14));
  const double t = nehari_scaling({1.0, 0.1, 1.0}, 5.0);
  const double oracle = bisect([](double s) { return 1.0 + 0.1 * s * s - s * s * s; }, 0.5, 2.0);
  CHECK(std::abs(t - oracle) < 1e-12);
  CHECK(t == doctest::Approx(1.0345).epsilon(1e-4));

  // extreme but admissible coefficient ratios
  for (double A : {1e-6, 1.0, 1e6}) {
    for (double B : {0.0, 1e-3, 1.0}) {
      for (double p : {4.5, 5.0, 5.99}) {
        const double s = nehari_scaling({A, B, 1.0}, p);
        const double g = A + B * s * s - std::pow(s, p - 2);
        CHECK(std::abs(g) <= 1e-12 * (A + B * s * s));
      }
    }
  }
  CHECK_THROWS_AS(nehari_scaling({1.0, 0.1, 0.0}, 5.0), ProjectionUndefined);
  CHECK_THROWS_AS(nehari_scaling({0.0, 0.1, 1.0}, 5.0), ProjectionUndefined);
  CHECK_THROWS_AS(nehari_scaling({1.0, 1e30, 1.0}, 5.0), NumericalError);
}

TEST_CASE("projection onto the Nehari set") {
  const TorusGrid g(16, kTwoPi);
  std::mt19937_64 rng(21);
  const auto P = SystemParams::checked(5.0, 0.25, 0.5);
  for (int trial = 0; trial < 10; ++trial) {
    const auto u = smooth_random(g, rng, 0.2, 1.0);
    const auto proj = project_nehari(u, P);
    CHECK(proj.t > 0.0);
    const double norm = norm_eps_sq(proj.field, P.epsilon);
    CHECK(std::abs(proj.nehari_residual) <= 1e-10 * norm);
    CHECK(std::abs(nehari_residual(proj.field, P)) <= 1e-10 * norm);
    CHECK(proj.energy == doctest::Approx(energy(proj.field, P)).epsilon(1e-12));

    const auto again = project_nehari(proj.field, P);
    CHECK(std::abs(again.t - 1.0) < 1e-10);

    const auto doubled = project_nehari(2.0 * u, P);
    CHECK(doubled.t == doctest::Approx(proj.t / 2).epsilon(1e-12));
    CHECK(max_abs_diff(doubled.field, proj.field) <= 1e-12 * proj.field.max());

    CHECK(energy_on_nehari(proj.field, P) == doctest::Approx(proj.energy).epsilon(1e-9));
    CHECK(proj.energy > 0.0);
  }
  CHECK_THROWS_AS(project_nehari(ScalarField::constant(g, -1.0), P), ProjectionUndefined);
  CHECK_THROWS_AS(project_nehari(ScalarField::constant(g, 0.0), P), ProjectionUndefined);
  CHECK_THROWS_AS(energy_on_nehari(ScalarField::constant(g, 1.0), P), ConsistencyError);
}

TEST_CASE("projection root is unique along each ray") {
  const TorusGrid g(16, kTwoPi);
  std::mt19937_64 rng(3);
  const auto P = SystemParams::checked(5.5, 0.2, 0.7);
  for (int trial = 0; trial < 100; ++trial) {
    const auto u = trial % 2 == 0 ? smooth_random(g, rng, 0.0, 1.0)
                                  : sbpp::testing::white_noise(g, rng, -0.5, 1.0);
    const EnergyParts e = energy_parts(u, P);
    int crossings = 0;
    double prev = e.A + e.B * 1e-6 - e.C * std::pow(1e-3, P.p - 2);
    for (int k = 1; k <= 600; ++k) {
      const double t = std::pow(10.0, -3.0 + 6.0 * k / 600);
      const double gt = e.A + e.B * t * t - e.C * std::pow(t, P.p - 2);
      if ((gt > 0.0) != (prev > 0.0)) ++crossings;
      prev = gt;
    }
    CHECK(crossings == 1);
  }
}

TEST_CASE("Sobolev gradient") {
  const TorusGrid g(16, kTwoPi);
  const auto P = SystemParams::checked(5.0, 0.25, 0.6);
  const double eps = P.epsilon;
  const double e3 = eps * eps * eps;

  // constant density (1/eps^3)(-1 - 4 pi) maps to the constant eps^3 times it
  const auto minus = ScalarField::constant(g, -1.0);
  const auto gm = energy_gradient(minus, P);
  CHECK(max_abs_diff(gm, ScalarField::constant(g, -1.0 - 4 * kPi)) < 1e-12);
  const auto minus_eval = evaluate_gradient(minus, P);
  CHECK(minus_eval.gradient_norm ==
        doctest::Approx(std::sqrt(norm_eps_sq(gm, eps))).epsilon(1e-12));
  CHECK(minus_eval.field_norm == doctest::Approx(std::sqrt(g.volume() / e3)).epsilon(1e-12));
  // R = u + phi u = -(1 + 4 pi) against (-eps^2 Lap + 1) u = -1
  CHECK(minus_eval.pde_residual == doctest::Approx(1 + 4 * kPi).epsilon(1e-12));

  std::mt19937_64 rng(17);
  for (int pair = 0; pair < 20; ++pair) {
    const auto u = smooth_random(g, rng, 0.3, 0.8);
    const auto h = smooth_random(g, rng, 0.0, 0.5);
    const auto eval = evaluate_gradient(u, P);
    const double pairing = inner_eps(eval.gradient, h, eps);
    CHECK(pairing == doctest::Approx(energy_derivative(u, h, P)).epsilon(1e-11));
    CHECK(eval.gradient_norm == doctest::Approx(std::sqrt(norm_eps_sq(eval.gradient, eps))).epsilon(1e-12));

    auto fd_err = [&](double tau) {
      const double fd = (energy(u + tau * h, P) - energy(u - tau * h, P)) / (2 * tau);
      return std::abs(fd - pairing) / std::abs(pairing);
    };
    const double e3_ = fd_err(1e-3), e4 = fd_err(1e-4);
    CHECK(e4 < 1e-5);
    const double order = std::log10(e3_ / e4);
    CHECK(order > 1.8);
    CHECK(order < 2.2);
  }
}

TEST_CASE("gradient vanishes at the constant solution") {
  const TorusGrid g(8, 2.0);
  const auto P = SystemParams::checked(5.0, 0.3, 0.8);
  const double c = bisect([](double x) { return x * x * x - 4 * kPi * x * x - 1.0; }, 4 * kPi, 20.0);
  const auto eval = evaluate_gradient(ScalarField::constant(g, c), P);
  CHECK(eval.gradient_norm < 1e-11 * eval.field_norm);
  CHECK(eval.pde_residual < 1e-11);
}

TEST_CASE("dealiased energy is consistent with its gradient") {
  const TorusGrid g(16, kTwoPi);
  const auto P = SystemParams::checked(5.0, 0.25, 0.6, Dealiasing::three_halves);
  std::mt19937_64 rng(29);
  const auto u = smooth_random(g, rng, 0.3, 0.8, 4, 10);
  const auto h = smooth_random(g, rng, 0.0, 0.5, 4, 10);
  const double pairing = inner_eps(energy_gradient(u, P), h, P.epsilon);
  const double tau = 1e-4;
  const double fd = (energy(u + tau * h, P) - energy(u - tau * h, P)) / (2 * tau);
  CHECK(fd == doctest::Approx(pairing).epsilon(1e-6));
  const auto proj = project_nehari(u, P);
  CHECK(std::abs(nehari_residual(proj.field, P)) <= 1e-10 * norm_eps_sq(proj.field, P.epsilon));
}

TEST_CASE("Nehari floors over random projected fields") {
  const TorusGrid g(16, kTwoPi);
  std::mt19937_64 rng(41);
  for (double eps : {0.5, 0.25, 0.125}) {
    const auto P = SystemParams::checked(5.0, 0.25, eps);
    double lp_floor = INFINITY, energy_floor = INFINITY;
    for (int trial = 0; trial < 20; ++trial) {
      const auto proj = project_nehari(smooth_random(g, rng, 0.1, 1.0), P);
      lp_floor = std::min(lp_floor, lp_norm_eps(positive_part(proj.field), P.p, eps));
      energy_floor = std::min(energy_floor, proj.energy);
    }
    MESSAGE("eps = " << eps << ": min |u+|_p,eps = " << lp_floor << ", min J = " << energy_floor);
    CHECK(lp_floor > 0.0);
    CHECK(energy_floor > 0.0);
  }
}
