#include "sbpp/profile_analysis.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sbpp/bopp_podolsky.hpp"
#include "sbpp/errors.hpp"

namespace sbpp {

namespace {
constexpr double kFourPi = 4.0 * std::numbers::pi;
}

void PeakSpec::validate(const TorusGrid& grid) const {
  std::ostringstream msg;
  if (!(cutoff_radius > 0.0 && cutoff_radius <= 0.5 * grid.length())) {
    msg << "cutoff radius must lie in (0, L/2], got " << cutoff_radius;
  } else if (!(epsilon > 0.0 && epsilon <= 0.25 * cutoff_radius)) {
    msg << "epsilon must lie in (0, r/4] = (0, " << 0.25 * cutoff_radius << "], got " << epsilon;
  } else if (!std::isfinite(center[0]) || !std::isfinite(center[1]) || !std::isfinite(center[2])) {
    msg << "peak centre must be finite";
  } else {
    return;
  }
  throw ParameterError(msg.str());
}

double default_cutoff_radius(const TorusGrid& grid) { return 0.25 * grid.length(); }

double cutoff(double rho, double r) {
  if (rho <= 0.5 * r) return 1.0;
  if (rho >= r) return 0.0;
  return 2.0 * (1.0 - rho / r);
}

ScalarField build_peak(const TorusGrid& grid, const PeakSpec& spec, const RadialProfile& U) {
  spec.validate(grid);
  std::vector<double> v(grid.size());
  for (std::size_t idx = 0; idx < v.size(); ++idx) {
    const double rho = grid.distance(grid.node(idx), spec.center);
    const double chi = cutoff(rho, spec.cutoff_radius);
    v[idx] = chi > 0.0 ? evaluate(U, rho / spec.epsilon) * chi : 0.0;
  }
  return ScalarField(grid, std::move(v));
}

NehariProjection psi_map(const TorusGrid& grid, const TorusPoint& xi, const SystemParams& P,
                         const RadialProfile& U, double cutoff_radius) {
  return project_nehari(build_peak(grid, {xi, P.epsilon, cutoff_radius}, U), P);
}

BarycenterEstimate barycenter_estimate(const ScalarField& u, double p) {
  const TorusGrid& g = u.grid();
  const double k0 = g.k0();
  std::array<std::complex<double>, 3> phasor{};
  double mass = 0.0;
  for (std::size_t idx = 0; idx < u.size(); ++idx) {
    if (!(u[idx] > 0.0)) continue;
    const double w = std::pow(u[idx], p);
    const TorusPoint x = g.node(idx);
    for (int j = 0; j < 3; ++j) phasor[j] += w * std::polar(1.0, k0 * x[j]);
    mass += w;
  }
  if (!(mass > 0.0)) {
    throw BarycenterUndefined("barycenter: the positive part of u vanishes");
  }
  BarycenterEstimate out{};
  for (int j = 0; j < 3; ++j) {
    out.confidence[j] = std::abs(phasor[j]) / mass;
    if (out.confidence[j] < 1e-12) {
      std::ostringstream msg;
      msg << "barycenter: direction undefined on axis " << j + 1;
      throw BarycenterUndefined(msg.str());
    }
    double x = std::arg(phasor[j]) / k0;
    if (x < 0.0) x += g.length();
    if (x >= g.length()) x -= g.length();
    out.point[j] = x;
  }
  return out;
}

TorusPoint barycenter(const ScalarField& u, double p) { return barycenter_estimate(u, p).point; }

MaxPoint max_point(const ScalarField& u) {
  const TorusGrid& g = u.grid();
  const int n = g.n();
  std::size_t best = 0;
  for (std::size_t idx = 1; idx < u.size(); ++idx) {
    if (u[idx] > u[best]) best = idx;
  }
  const double top = u[best];
  int count = 0;
  for (std::size_t idx = 0; idx < u.size(); ++idx) {
    const double v = u[idx];
    if (!(v >= 0.5 * top)) continue;
    const auto [i, j, k] = g.multi_index(idx);
    bool strict = true;
    for (int dk = -1; dk <= 1 && strict; ++dk) {
      for (int dj = -1; dj <= 1 && strict; ++dj) {
        for (int di = -1; di <= 1; ++di) {
          if (di == 0 && dj == 0 && dk == 0) continue;
          const std::size_t nb =
              g.index((i + di + n) % n, (j + dj + n) % n, (k + dk + n) % n);
          if (!(v > u[nb])) {
            strict = false;
            break;
          }
        }
      }
    }
    if (strict) ++count;
  }
  return {g.node(best), best, top, count};
}

double concentration_ratio(const ScalarField& u, const TorusPoint& q, double radius,
                           const SystemParams& P, double m_infinity) {
  const TorusGrid& g = u.grid();
  if (!(radius > 0.0 && radius <= 0.5 * g.length())) {
    throw ParameterError("concentration_ratio: radius must lie in (0, L/2]");
  }
  if (!(m_infinity > 0.0)) throw ParameterError("concentration_ratio: m_inf must be positive");
  double sum = 0.0;
  for (std::size_t idx = 0; idx < u.size(); ++idx) {
    if (u[idx] > 0.0 && g.distance(g.node(idx), q) < radius) sum += std::pow(u[idx], P.p);
  }
  const double e3 = P.epsilon * P.epsilon * P.epsilon;
  const double local = sum * g.cell_volume() / e3;
  return local / (2.0 * P.p / (P.p - 2.0) * m_infinity);
}

double profile_error(const ScalarField& u, const SystemParams& P, const RadialProfile& U,
                     double cutoff_radius) {
  const MaxPoint mp = max_point(u);
  const ScalarField w = build_peak(u.grid(), {mp.point, P.epsilon, cutoff_radius}, U);
  double err = 0.0;
  for (std::size_t idx = 0; idx < u.size(); ++idx) err = std::max(err, std::abs(u[idx] - w[idx]));
  return err;
}

ConstantBranch constant_branch(double p) {
  if (!(p > 4.0 && p < 6.0)) {
    std::ostringstream msg;
    msg << "constant_branch: p must lie in (4, 6), got " << p;
    throw ParameterError(msg.str());
  }
  auto f = [p](double c) { return std::pow(c, p - 2.0) - kFourPi * c * c - 1.0; };
  // f(lo) = -1 since lo^(p-4) = 4 pi
  double lo = std::pow(kFourPi, 1.0 / (p - 4.0));
  double hi = 2.0 * lo;
  while (f(hi) <= 0.0) hi *= 2.0;
  for (int it = 0; it < 400 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (f(mid) > 0.0) hi = mid; else lo = mid;
  }
  const double c = std::abs(f(lo)) <= std::abs(f(hi)) ? lo : hi;
  ConstantBranch out{};
  out.c_star = c;
  out.energy_coefficient = 0.25 * c * c + (0.25 - 1.0 / p) * std::pow(c, p);
  out.residual = f(c);
  return out;
}

PhiSmallness phi_smallness(const ScalarField& u, double a, Dealiasing mode) {
  const ScalarField phi = solve_phi(u, a, mode);
  const auto grad = gradient(phi);
  const ScalarField lap = laplacian(phi);
  PhiSmallness out{0.0, 0.0, 0.0};
  for (std::size_t idx = 0; idx < u.size(); ++idx) {
    out.value = std::max(out.value, std::abs(phi[idx]));
    out.gradient = std::max(out.gradient, std::hypot(grad[0][idx], grad[1][idx], grad[2][idx]));
    out.laplacian = std::max(out.laplacian, std::abs(lap[idx]));
  }
  return out;
}

double coefficient_of_variation(const ScalarField& u) {
  const double mean = u.mean();
  double var = 0.0;
  for (double v : u.values()) var += (v - mean) * (v - mean);
  var /= static_cast<double>(u.size());
  if (mean == 0.0) return var > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  return std::sqrt(var) / std::abs(mean);
}

ProfileDiagnostics diagnose(const ScalarField& u, const SystemParams& P, const RadialProfile& U,
                           double cutoff_radius) {
  const TorusGrid& g = u.grid();
  const MaxPoint mp = max_point(u);
  const BarycenterEstimate b = barycenter_estimate(u, P.p);
  const double ball = default_cutoff_radius(g);
  const double r = cutoff_radius > 0.0 ? cutoff_radius : ball;
  ProfileDiagnostics d{};
  d.max_point = mp.point;
  d.max_value = mp.value;
  d.n_local_maxima = mp.n_local_maxima;
  d.barycenter = b.point;
  d.barycenter_confidence = b.confidence;
  d.concentration_ratio = concentration_ratio(u, mp.point, ball, P, limit_energy(U));
  d.profile_error = profile_error(u, P, U, r);
  d.phi_c2 = phi_smallness(u, P.a, P.dealiasing).total();
  return d;
}

std::string to_json(const ProfileDiagnostics& d) {
  nlohmann::ordered_json j;
  j["max_point"] = d.max_point;
  j["max_value"] = d.max_value;
  j["n_local_maxima"] = d.n_local_maxima;
  j["barycenter"] = d.barycenter;
  j["concentration_ratio"] = d.concentration_ratio;
  j["profile_error"] = d.profile_error;
  j["phi_c2"] = d.phi_c2;
  return j.dump();
}

}  // namespace sbpp
