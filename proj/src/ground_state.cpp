#include "sbpp/ground_state.hpp"

#include <algorithm>
#include <array>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "sbpp/errors.hpp"

namespace sbpp {
namespace {

namespace odeint = boost::numeric::odeint;
using State = std::array<double, 2>;

constexpr double kBracketLow = 1.001;
constexpr double kBracketHigh = 1000.0;
constexpr double kShootRadius = 40.0;
constexpr double kSpliceFraction = 1e-8;
constexpr double kTailWindow = 4.0;

void require_exponent(double p) {
  if (!(p > 4.0 && p < 6.0)) {
    std::ostringstream msg;
    msg << "exponent p must lie in (4, 6), got " << p;
    throw ParameterError(msg.str());
  }
}

double nonlinearity(double u, double p) { return u > 0.0 ? std::pow(u, p - 1.0) : 0.0; }

struct RadialRhs {
  double p;
  void operator()(const State& y, State& dy, double r) const {
    dy[0] = y[1];
    dy[1] = y[0] - nonlinearity(y[0], p) - 2.0 * y[1] / r;
  }
};

/// Taylor start at the regular singular point: u = u0 + a r^2 + b r^4.
State series_start(double p, double u0, double r) {
  const double f0 = u0 - std::pow(u0, p - 1.0);
  const double df0 = 1.0 - (p - 1.0) * std::pow(u0, p - 2.0);
  const double a = f0 / 6.0;
  const double b = df0 * a / 20.0;
  const double r2 = r * r;
  return {u0 + a * r2 + b * r2 * r2, 2.0 * a * r + 4.0 * b * r2 * r};
}

enum class Event { none, crossed_zero, turned_back };

Event classify(const State& y) {
  if (y[0] < 0.0) return Event::crossed_zero;
  if (y[1] > 0.0) return Event::turned_back;
  return Event::none;
}

double tail_value(double c, double rate, double r) { return c * std::exp(-rate * r) / r; }
double tail_derivative(double c, double rate, double r) {
  return -c * std::exp(-rate * r) * (rate * r + 1.0) / (r * r);
}

/// Composite Simpson over uniformly spaced samples (odd count).
double simpson(const std::vector<double>& f, double h) {
  const std::size_t n = f.size();
  if (n < 3 || n % 2 == 0) throw NumericalError("simpson: need an odd number (>= 3) of samples");
  double s = f.front() + f.back();
  for (std::size_t i = 1; i + 1 < n; ++i) s += (i % 2 == 1 ? 4.0 : 2.0) * f[i];
  return s * h / 3.0;
}

double tail_integral(const RadialProfile& prof, bool h1) {
  const double r0 = prof.splice_radius();
  const double h = prof.r_nodes[1] - prof.r_nodes[0];
  const std::size_t count = 2 * static_cast<std::size_t>(std::ceil(30.0 / h)) + 1;
  std::vector<double> f(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double r = r0 + h * static_cast<double>(i);
    const double u = tail_value(prof.tail_amplitude, prof.decay_rate, r);
    if (h1) {
      const double du = tail_derivative(prof.tail_amplitude, prof.decay_rate, r);
      f[i] = (du * du + u * u) * r * r;
    } else {
      f[i] = std::pow(u, prof.p) * r * r;
    }
  }
  return simpson(f, h);
}

/// Local Fritsch-Carlson limiting of the endpoint slopes of one interval.
void limit_slopes(double secant, double& d0, double& d1) {
  if (secant == 0.0) {
    d0 = d1 = 0.0;
    return;
  }
  double a = d0 / secant;
  double b = d1 / secant;
  if (a < 0.0) a = 0.0;
  if (b < 0.0) b = 0.0;
  const double s = a * a + b * b;
  if (s > 9.0) {
    const double tau = 3.0 / std::sqrt(s);
    a *= tau;
    b *= tau;
  }
  d0 = a * secant;
  d1 = b * secant;
}

}  // namespace

ShootOutcome shoot(double p, double u0, double r_max, const ShootTolerances& tol) {
  require_exponent(p);
  if (!(u0 > 1.0)) throw ParameterError("shoot: u0 must exceed 1");
  if (!(r_max >= 20.0)) throw ParameterError("shoot: r_max must be >= 20");

  const double core = std::min(1.0, std::pow(u0, -(p - 2.0) / 2.0));
  const double r_start = std::min(tol.series_radius, 1e-2 * core);
  const double dr = tol.node_spacing;

  ShootOutcome out{ShootKind::decayed, r_max, {}, {}, {}};
  out.r.push_back(0.0);
  out.u.push_back(u0);
  out.du.push_back(0.0);
  std::size_t next_node = 1;
  while (next_node * dr <= r_start) {
    const double r = next_node * dr;
    const State y = series_start(p, u0, r);
    out.r.push_back(r);
    out.u.push_back(y[0]);
    out.du.push_back(y[1]);
    ++next_node;
  }

  auto stepper = odeint::make_dense_output(tol.abs_tol, tol.rel_tol,
                                           odeint::runge_kutta_dopri5<State>());
  const RadialRhs rhs{p};
  stepper.initialize(series_start(p, u0, r_start), r_start, 1e-2 * r_start);

  State y{};
  while (true) {
    std::pair<double, double> span;
    try {
      span = stepper.do_step(rhs);
    } catch (const std::exception& e) {
      const State s = stepper.current_state();
      throw IntegrationFailure(std::string("shoot: integrator failed: ") + e.what(),
                               stepper.current_time(), s[0], s[1]);
    }
    const double t0 = span.first;
    const double t1 = span.second;
    if (t1 - t0 < 1e-14 * std::max(1.0, t1)) {
      const State s = stepper.current_state();
      throw IntegrationFailure("shoot: step size underflow", t1, s[0], s[1]);
    }

    // Locate the first event in (t0, t1] by bisection on the dense output.
    const Event end_event = classify(stepper.current_state());
    double event_r = t1;
    if (end_event != Event::none) {
      double a = t0, b = t1;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (a + b);
        stepper.calc_state(mid, y);
        if (classify(y) != Event::none) b = mid; else a = mid;
      }
      event_r = b;
    }
    const double sample_end = std::min(event_r, r_max);
    while (next_node * dr <= sample_end) {
      const double r = next_node * dr;
      if (r > t1) break;
      stepper.calc_state(r, y);
      if (classify(y) != Event::none) break;
      out.r.push_back(r);
      out.u.push_back(y[0]);
      out.du.push_back(y[1]);
      ++next_node;
    }
    if (end_event != Event::none && event_r <= r_max) {
      stepper.calc_state(event_r, y);
      out.kind = classify(y) == Event::crossed_zero ? ShootKind::crossed_zero
                                                    : ShootKind::turned_back;
      out.r_event = event_r;
      return out;
    }
    if (t1 >= r_max) return out;
  }
}

RadialProfile find_ground_state(double p, double tol, const ShootTolerances& st) {
  return find_ground_state_in(p, kBracketLow, kBracketHigh, tol, st);
}

RadialProfile find_ground_state_in(double p, double u0_low, double u0_high, double tol,
                                   const ShootTolerances& st) {
  require_exponent(p);
  if (!(tol > 0.0)) throw ParameterError("find_ground_state: tol must be positive");
  if (!(u0_low > 1.0 && u0_high > u0_low)) {
    throw ParameterError("find_ground_state: need 1 < u0_low < u0_high");
  }

  ShootOutcome lo = shoot(p, u0_low, kShootRadius, st);
  ShootOutcome hi = shoot(p, u0_high, kShootRadius, st);
  if (lo.kind != ShootKind::turned_back || hi.kind != ShootKind::crossed_zero) {
    std::ostringstream msg;
    msg << "find_ground_state: [" << u0_low << ", " << u0_high
        << "] does not bracket the ground state";
    throw BracketError(msg.str());
  }
  double a = u0_low, b = u0_high;
  while (b - a > tol) {
    const double mid = 0.5 * (a + b);
    if (mid <= a || mid >= b) break;
    ShootOutcome s = shoot(p, mid, kShootRadius, st);
    if (s.kind == ShootKind::turned_back) {
      a = mid;
      lo = std::move(s);
    } else if (s.kind == ShootKind::crossed_zero) {
      b = mid;
      hi = std::move(s);
    } else {
      a = b = mid;
      lo = hi = std::move(s);
      break;
    }
  }

  // The two bracket trajectories agree until the unstable mode separates them;
  // only that common part is trusted.
  const std::size_t common = std::min(lo.u.size(), hi.u.size());
  const double u0 = 0.5 * (a + b);
  RadialProfile prof;
  prof.p = p;
  prof.u0 = u0;
  std::size_t splice = 0;
  for (std::size_t i = 0; i < common; ++i) {
    const double u = 0.5 * (lo.u[i] + hi.u[i]);
    const double du = 0.5 * (lo.du[i] + hi.du[i]);
    const bool reliable = u > 0.0 && (i == 0 || du < 0.0) &&
                          std::abs(lo.u[i] - hi.u[i]) <= 1e-3 * u;
    if (!reliable) break;
    prof.r_nodes.push_back(lo.r[i]);
    prof.u_values.push_back(u);
    prof.du_values.push_back(du);
    splice = i;
    if (u <= kSpliceFraction * u0) break;
  }
  prof.u_values.front() = u0;
  if (splice % 2 == 1) --splice;  // Simpson needs an even interval count
  prof.r_nodes.resize(splice + 1);
  prof.u_values.resize(splice + 1);
  prof.du_values.resize(splice + 1);

  const double r_s = prof.r_nodes.back();
  if (r_s < 2.0 * kTailWindow) {
    throw NumericalError("find_ground_state: reliable trajectory too short for a tail fit");
  }
  // Least squares fit of log(r U) = log c - rate * r on the last window.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int count = 0;
  for (std::size_t i = 0; i <= splice; ++i) {
    const double r = prof.r_nodes[i];
    if (r < r_s - kTailWindow) continue;
    const double yv = std::log(r * prof.u_values[i]);
    sx += r;
    sy += yv;
    sxx += r * r;
    sxy += r * yv;
    ++count;
  }
  const double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
  prof.decay_rate = -slope;
  prof.tail_amplitude = prof.u_values.back() * r_s * std::exp(prof.decay_rate * r_s);
  if (!(prof.decay_rate >= 0.9 && prof.decay_rate <= 1.1)) {
    std::ostringstream msg;
    msg << "find_ground_state: fitted decay rate " << prof.decay_rate
        << " outside [0.9, 1.1]";
    throw NumericalError(msg.str());
  }
  return prof;
}

double evaluate(const RadialProfile& prof, double r) {
  if (r < 0.0) throw ParameterError("evaluate: r must be nonnegative");
  const auto& x = prof.r_nodes;
  if (r >= x.back()) {
    return r == x.back() ? prof.u_values.back() : tail_value(prof.tail_amplitude, prof.decay_rate, r);
  }
  const auto it = std::upper_bound(x.begin(), x.end(), r);
  const std::size_t k = static_cast<std::size_t>(it - x.begin()) - 1;
  const double h = x[k + 1] - x[k];
  const double y0 = prof.u_values[k];
  const double y1 = prof.u_values[k + 1];
  double d0 = prof.du_values[k];
  double d1 = prof.du_values[k + 1];
  limit_slopes((y1 - y0) / h, d0, d1);
  const double t = (r - x[k]) / h;
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double v = (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * h * d0 +
                   (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * h * d1;
  return std::max(v, 0.0);
}

double h1_norm_sq(const RadialProfile& prof) {
  std::vector<double> f(prof.r_nodes.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double r = prof.r_nodes[i];
    const double u = prof.u_values[i];
    const double du = prof.du_values[i];
    f[i] = (du * du + u * u) * r * r;
  }
  const double h = prof.r_nodes[1] - prof.r_nodes[0];
  return 4.0 * std::numbers::pi * (simpson(f, h) + tail_integral(prof, true));
}

double lp_integral(const RadialProfile& prof) {
  std::vector<double> f(prof.r_nodes.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double r = prof.r_nodes[i];
    f[i] = std::pow(prof.u_values[i], prof.p) * r * r;
  }
  const double h = prof.r_nodes[1] - prof.r_nodes[0];
  return 4.0 * std::numbers::pi * (simpson(f, h) + tail_integral(prof, false));
}

double nehari_identity_error(const RadialProfile& prof) {
  const double h1 = h1_norm_sq(prof);
  return std::abs(h1 - lp_integral(prof)) / h1;
}

double limit_energy(const RadialProfile& prof) {
  return (prof.p - 2.0) / (2.0 * prof.p) * lp_integral(prof);
}

double limit_energy_h1(const RadialProfile& prof) {
  return (prof.p - 2.0) / (2.0 * prof.p) * h1_norm_sq(prof);
}

double half_max_radius(const RadialProfile& prof) {
  const double target = 0.5 * prof.u0;
  double a = 0.0;
  double b = prof.splice_radius();
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (a + b);
    if (evaluate(prof, mid) > target) a = mid; else b = mid;
  }
  return b;
}

void write_profile(std::ostream& out, const RadialProfile& prof) {
  out << "# p u0 decay_rate tail_amplitude\n";
  out << std::setprecision(17);
  out << "# " << prof.p << ' ' << prof.u0 << ' ' << prof.decay_rate << ' '
      << prof.tail_amplitude << '\n';
  for (std::size_t i = 0; i < prof.r_nodes.size(); ++i) {
    out << prof.r_nodes[i] << ' ' << prof.u_values[i] << '\n';
  }
  if (!out) throw NumericalError("write_profile: write failed");
}

void write_profile(const std::string& path, const RadialProfile& prof) {
  std::ofstream out(path);
  if (!out) throw ParameterError("cannot open " + path + " for writing");
  write_profile(out, prof);
}

RadialProfile read_profile(std::istream& in) {
  std::string header, values;
  if (!std::getline(in, header) || header.rfind("# p u0 decay_rate tail_amplitude", 0) != 0) {
    throw ParameterError("profile table: missing header");
  }
  if (!std::getline(in, values) || values.rfind("# ", 0) != 0) {
    throw ParameterError("profile table: missing parameter line");
  }
  RadialProfile prof;
  std::istringstream vs(values.substr(2));
  if (!(vs >> prof.p >> prof.u0 >> prof.decay_rate >> prof.tail_amplitude)) {
    throw ParameterError("profile table: malformed parameter line");
  }
  double r, u;
  while (in >> r >> u) {
    prof.r_nodes.push_back(r);
    prof.u_values.push_back(u);
  }
  const std::size_t n = prof.r_nodes.size();
  if (n < 3) throw ParameterError("profile table: too few nodes");
  // Fritsch-Carlson (harmonic mean) slopes; U'(0) = 0 by regularity.
  prof.du_values.assign(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double h0 = prof.r_nodes[i] - prof.r_nodes[i - 1];
    const double h1 = prof.r_nodes[i + 1] - prof.r_nodes[i];
    const double s0 = (prof.u_values[i] - prof.u_values[i - 1]) / h0;
    const double s1 = (prof.u_values[i + 1] - prof.u_values[i]) / h1;
    if (s0 * s1 > 0.0) {
      const double w0 = 2 * h1 + h0, w1 = h1 + 2 * h0;
      prof.du_values[i] = (w0 + w1) / (w0 / s0 + w1 / s1);
    }
  }
  prof.du_values[n - 1] = tail_derivative(prof.tail_amplitude, prof.decay_rate, prof.r_nodes[n - 1]);
  return prof;
}

RadialProfile read_profile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open " + path);
  return read_profile(in);
}

}  // namespace sbpp
