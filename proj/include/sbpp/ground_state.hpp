#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sbpp {

/// Positive radial ground state U of -Delta U + U = U^(p-1) on R^3.
///
/// The table holds (r, U, U') on a uniform node grid from r = 0 up to the
/// splice radius; beyond it U is continued by tail_amplitude * exp(-decay_rate r) / r.
struct RadialProfile {
  double p = 0.0;
  std::vector<double> r_nodes;
  std::vector<double> u_values;
  std::vector<double> du_values;
  double u0 = 0.0;
  double decay_rate = 0.0;
  double tail_amplitude = 0.0;

  double splice_radius() const { return r_nodes.back(); }
};

/// Step control for the radial integrator.
struct ShootTolerances {
  double rel_tol = 1e-10;
  double abs_tol = 1e-16;
  /// Uniform spacing of the sampled trajectory.
  double node_spacing = 1.0 / 256.0;
  /// End of the series start interval near the singular point r = 0.
  double series_radius = 1e-3;
};

/// How a shot from U(0) = u0 ends.
///   crossed_zero - the trajectory overshoots and U changes sign (u0 too large)
///   turned_back  - U' becomes positive while U > 0 (u0 too small)
///   decayed      - neither happened before r_max
enum class ShootKind { crossed_zero, turned_back, decayed };

struct ShootOutcome {
  ShootKind kind;
  /// Radius of the event (r_max when decayed).
  double r_event;
  /// Sampled trajectory up to the last node before the event.
  std::vector<double> r;
  std::vector<double> u;
  std::vector<double> du;
};

/// Integrates u'' + (2/r) u' - u + (u^+)^(p-1) = 0 with u(0) = u0, u'(0) = 0.
/// Throws IntegrationFailure on step-size underflow.
ShootOutcome shoot(double p, double u0, double r_max, const ShootTolerances& tol = {});

/// Bisection on u0 between a turned_back and a crossed_zero shot, followed by
/// an exponential-tail splice. Throws ParameterError for p outside (4, 6) and
/// BracketError if [1.001, 1000] does not bracket the ground state.
RadialProfile find_ground_state(double p, double tol = 1e-13, const ShootTolerances& st = {});

/// Same as find_ground_state but with an explicit initial bracket.
RadialProfile find_ground_state_in(double p, double u0_low, double u0_high, double tol,
                                   const ShootTolerances& st = {});

/// Monotone cubic Hermite interpolation inside the table, analytic tail beyond.
double evaluate(const RadialProfile& profile, double r);

/// 4 pi int (U'^2 + U^2) r^2 dr, tail included.
double h1_norm_sq(const RadialProfile& profile);
/// 4 pi int U^p r^2 dr, tail included.
double lp_integral(const RadialProfile& profile);
/// |‖U‖²_{H¹} − |U|_p^p| / ‖U‖²_{H¹}.
double nehari_identity_error(const RadialProfile& profile);

/// m_inf = (p - 2) / (2p) |U|_p^p.
double limit_energy(const RadialProfile& profile);
/// The same level through the H^1 norm, (p - 2) / (2p) ‖U‖²_{H¹}.
double limit_energy_h1(const RadialProfile& profile);

/// Smallest r with U(r) <= U(0) / 2.
double half_max_radius(const RadialProfile& profile);

/// Text table: "# p u0 decay_rate tail_amplitude", a "# " line with those four
/// values, then one "r u" pair per line at full double precision.
void write_profile(std::ostream& out, const RadialProfile& profile);
void write_profile(const std::string& path, const RadialProfile& profile);
/// Derivatives of a reloaded table are rebuilt by Fritsch-Carlson slopes.
RadialProfile read_profile(std::istream& in);
RadialProfile read_profile(const std::string& path);

}  // namespace sbpp
