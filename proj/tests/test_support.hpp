#pragma once

#include <cmath>
#include <numbers>
#include <random>

#include "sbpp/grid_field.hpp"

namespace sbpp::testing {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Independent uniform values in [lo, hi) at every node.
inline ScalarField white_noise(const TorusGrid& g, std::mt19937_64& rng, double lo = -1.0,
                               double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> v(g.size());
  for (auto& x : v) x = dist(rng);
  return ScalarField(g, std::move(v));
}

/// offset + a handful of random low-frequency cosines; smooth and band-limited.
inline ScalarField smooth_random(const TorusGrid& g, std::mt19937_64& rng, double offset,
                                 double amplitude, int max_mode = 2, int terms = 6) {
  std::uniform_int_distribution<int> mode(-max_mode, max_mode);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> phase(0.0, kTwoPi);
  struct Term {
    int mx, my, mz;
    double a, ph;
  };
  std::vector<Term> ts;
  for (int t = 0; t < terms; ++t) {
    ts.push_back({mode(rng), mode(rng), mode(rng), amplitude * unit(rng), phase(rng)});
  }
  const double k0 = g.k0();
  return ScalarField::sample(g, [&](double x, double y, double z) {
    double v = offset;
    for (const auto& t : ts) v += t.a * std::cos(k0 * (t.mx * x + t.my * y + t.mz * z) + t.ph);
    return v;
  });
}

inline double max_abs_diff(const ScalarField& a, const ScalarField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double max_abs(const ScalarField& a) {
  double m = 0.0;
  for (double v : a.values()) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace sbpp::testing
