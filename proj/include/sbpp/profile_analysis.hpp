#pragma once

#include <array>
#include <cstddef>
#include <string>

#include "sbpp/grid_field.hpp"
#include "sbpp/ground_state.hpp"
#include "sbpp/nehari_energy.hpp"

namespace sbpp {

/// A rescaled ground state centred at `center`, cut off at torus distance
/// cutoff_radius.
struct PeakSpec {
  TorusPoint center;
  double epsilon;
  double cutoff_radius;

  /// Throws ParameterError unless 0 < cutoff_radius <= L/2 and
  /// 0 < epsilon <= cutoff_radius/4.
  void validate(const TorusGrid& grid) const;
};

/// L/4, the default cutoff radius.
double default_cutoff_radius(const TorusGrid& grid);

/// 1 on [0, r/2], 0 on [r, inf), linear in between (slope -2/r).
double cutoff(double rho, double r);

/// W(x) = U(d(x, center)/eps) * cutoff(d(x, center), r).
ScalarField build_peak(const TorusGrid& grid, const PeakSpec& spec, const RadialProfile& U);

/// Nehari projection of the peak at xi.
NehariProjection psi_map(const TorusGrid& grid, const TorusPoint& xi, const SystemParams& P,
                         const RadialProfile& U, double cutoff_radius);

struct BarycenterEstimate {
  TorusPoint point;
  /// Per axis |sum e^{i k0 x_j} w| / sum w; 1 for a point mass, 0 when the
  /// weight is spread uniformly or split between antipodes.
  std::array<double, 3> confidence;
};

/// Circular mean of the weight (u^+)^p along each axis. Throws
/// BarycenterUndefined if any axis has confidence below 1e-12.
BarycenterEstimate barycenter_estimate(const ScalarField& u, double p);
TorusPoint barycenter(const ScalarField& u, double p);

struct MaxPoint {
  TorusPoint point;
  std::size_t index;
  double value;
  /// Strict 26-neighbour local maxima with value >= max / 2.
  int n_local_maxima;
};

/// Global grid maximum (first in storage order on ties).
MaxPoint max_point(const ScalarField& u);

/// (1/eps^3) int_{d(x,q) < radius} (u^+)^p divided by (2p/(p-2)) m_inf.
double concentration_ratio(const ScalarField& u, const TorusPoint& q, double radius,
                           const SystemParams& P, double m_infinity);

/// max |u - W| with W the peak built at the maximum point of u.
double profile_error(const ScalarField& u, const SystemParams& P, const RadialProfile& U,
                     double cutoff_radius);

/// Positive constant solution c_* of c^(p-2) - 4 pi c^2 - 1 = 0 and the
/// coefficient k with J_eps(c_*) = vol * k / eps^3.
struct ConstantBranch {
  double c_star;
  double energy_coefficient;
  double residual;
};

ConstantBranch constant_branch(double p);

/// Grid maxima of |phi_u|, |grad phi_u| and |Lap phi_u|.
struct PhiSmallness {
  double value;
  double gradient;
  double laplacian;
  double total() const { return value + gradient + laplacian; }
};

PhiSmallness phi_smallness(const ScalarField& u, double a,
                           Dealiasing mode = Dealiasing::none);

/// Coefficient of variation, standard deviation over |mean|.
double coefficient_of_variation(const ScalarField& u);

struct ProfileDiagnostics {
  TorusPoint max_point;
  double max_value;
  int n_local_maxima;
  TorusPoint barycenter;
  std::array<double, 3> barycenter_confidence;
  double concentration_ratio;
  double profile_error;
  double phi_c2;
};

/// Everything above for one solution. The concentration ball has radius L/4;
/// the comparison peak uses cutoff_radius (L/4 when not positive).
ProfileDiagnostics diagnose(const ScalarField& u, const SystemParams& P, const RadialProfile& U,
                           double cutoff_radius = 0.0);

/// One JSON object: max_point, max_value, n_local_maxima, barycenter,
/// concentration_ratio, profile_error, phi_c2.
std::string to_json(const ProfileDiagnostics& d);

}  // namespace sbpp
