#include "sbpp/variational_solver.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "sbpp/profile_analysis.hpp"

namespace sbpp {

namespace {

// Two energies this close are indistinguishable in double precision.
double energy_noise(const EnergyParts& e, double t, double p) {
  const double t2 = t * t;
  return 64.0 * std::numeric_limits<double>::epsilon() *
         (0.5 * t2 * e.A + 0.25 * t2 * t2 * e.B + std::pow(t, p) * e.C / p);
}

struct Trial {
  NehariProjection proj;
  double noise;
};

Trial project_with_noise(const ScalarField& v, const SystemParams& P) {
  const EnergyParts e = energy_parts(v, P);
  if (!(e.C > 0.0)) throw ProjectionUndefined("the positive part of the iterate vanished");
  const double t = nehari_scaling(e, P.p);
  const double t2 = t * t;
  const double tp = std::pow(t, P.p);
  NehariProjection proj{t, t * v, 0.5 * t2 * e.A + 0.25 * t2 * t2 * e.B - tp * e.C / P.p,
                        t2 * e.A + t2 * t2 * e.B - tp * e.C};
  return {std::move(proj), energy_noise(e, t, P.p)};
}

void log_iteration(std::ostream* out, int iter, double energy, double grad, double t) {
  if (out == nullptr) return;
  nlohmann::ordered_json j;
  j["iter"] = iter;
  j["energy"] = energy;
  j["grad_norm"] = grad;
  j["t"] = t;
  *out << j.dump() << '\n';
}

double l2_norm(const ScalarField& f) { return std::sqrt(integrate(f * f)); }

}  // namespace

void SolverOptions::validate() const {
  std::ostringstream msg;
  if (max_iters < 0) {
    msg << "max_iters must be nonnegative";
  } else if (!(grad_tol > 0.0)) {
    msg << "grad_tol must be positive";
  } else if (!(step_init > 0.0)) {
    msg << "step_init must be positive";
  } else if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0)) {
    msg << "backtrack_factor must lie in (0, 1)";
  } else if (!(armijo_c > 0.0 && armijo_c < 0.5)) {
    msg << "armijo_c must lie in (0, 1/2)";
  } else if (!(min_step > 0.0 && min_step < step_init)) {
    msg << "min_step must lie in (0, step_init)";
  } else {
    return;
  }
  throw ParameterError(msg.str());
}

SolveReport minimize_from(const ScalarField& u0, const SystemParams& P, const SolverOptions& opts) {
  P.validate();
  opts.validate();
  Trial current = project_with_noise(u0, P);
  std::vector<double> t_history{current.proj.t};
  std::vector<double> energy_history{current.proj.energy};

  int iter = 0;
  bool converged = false;
  GradientEvaluation ev = evaluate_gradient(current.proj.field, P);
  while (true) {
    const double rel = ev.gradient_norm / ev.field_norm;
    log_iteration(opts.log, iter, current.proj.energy, rel, current.proj.t);
    if (rel <= opts.grad_tol && ev.pde_residual <= 10.0 * opts.grad_tol) {
      converged = true;
      break;
    }
    if (iter >= opts.max_iters) break;

    const double slope = ev.gradient_norm * ev.gradient_norm;
    double s = opts.step_init;
    std::optional<Trial> accepted;
    while (s >= opts.min_step) {
      try {
        Trial trial = project_with_noise(current.proj.field - s * ev.gradient, P);
        const double budget = std::max(current.noise, trial.noise);
        if (trial.proj.energy <= current.proj.energy - opts.armijo_c * s * slope + budget) {
          accepted = std::move(trial);
          break;
        }
      } catch (const ProjectionUndefined&) {
        // the step overshoots into u^+ = 0; shorten it
      }
      s *= opts.backtrack_factor;
    }
    if (!accepted) {
      std::ostringstream msg;
      msg << "line search failed at iteration " << iter << " (relative gradient " << rel << ")";
      throw NonDescent(msg.str(), current.proj.field, iter);
    }
    if (accepted->proj.energy > current.proj.energy + std::max(current.noise, accepted->noise)) {
      throw ConsistencyError("accepted step increased the energy");
    }
    // Re-evaluate at the accepted field so the next comparison is not offset
    // by the round-off of the scaled (A, B, C).
    current = project_with_noise(accepted->proj.field, P);
    current.proj.t = accepted->proj.t;
    t_history.push_back(current.proj.t);
    energy_history.push_back(current.proj.energy);
    ++iter;
    ev = evaluate_gradient(current.proj.field, P);
  }

  const double width = peak_width_points(current.proj.field);
  SolveReport report{current.proj.field,
                     P,
                     current.proj.energy,
                     ev.gradient_norm / ev.field_norm,
                     ev.pde_residual,
                     iter,
                     std::move(t_history),
                     std::move(energy_history),
                     converged,
                     coefficient_of_variation(current.proj.field) >= 1e-3,
                     width,
                     width >= 6.0};
  return report;
}

SolveReport continue_in_epsilon(const SolveReport& previous, const SystemParams& next,
                                const SolverOptions& opts, std::optional<TorusGrid> grid) {
  next.validate();
  if (next.epsilon > previous.params.epsilon) {
    std::ostringstream msg;
    msg << "continuation requires a nonincreasing epsilon (" << previous.params.epsilon
        << " -> " << next.epsilon << ")";
    throw ParameterError(msg.str());
  }
  const TorusGrid& old_grid = previous.field.grid();
  ScalarField start = previous.field;
  if (grid && !(*grid == old_grid)) {
    if (grid->length() != old_grid.length() || grid->n() < old_grid.n()) {
      throw ParameterError("continuation needs the same period and an equal or finer grid");
    }
    start = upsample(previous.field, grid->n(), false);
  }
  return minimize_from(start, next, opts);
}

double aligned_difference(const ScalarField& a, const ScalarField& b, double p) {
  const TorusGrid& g = a.grid();
  if (!(b.grid() == g)) throw ParameterError("aligned_difference: fields live on different grids");
  const TorusPoint ba = barycenter(a, p);
  const TorusPoint bb = barycenter(b, p);
  std::array<int, 3> base{};
  for (int j = 0; j < 3; ++j) {
    base[j] = static_cast<int>(std::lround(g.periodic_delta(bb[j], ba[j]) / g.spacing()));
  }
  const double norm = l2_norm(a);
  double best = std::numeric_limits<double>::infinity();
  for (int dz = -1; dz <= 1; ++dz) {
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const ScalarField moved = b.shifted({base[0] + dx, base[1] + dy, base[2] + dz});
        best = std::min(best, l2_norm(a - moved) / norm);
      }
    }
  }
  return best;
}

MultistartResult multistart(const std::vector<TorusPoint>& seeds, const TorusGrid& grid,
                            const SystemParams& P, const RadialProfile& U,
                            const SolverOptions& opts, const MultistartOptions& mopts) {
  if (seeds.empty()) throw ParameterError("multistart needs at least one seed");
  if (mopts.threads < 1) throw ParameterError("multistart needs at least one thread");
  if (!(mopts.initial_noise >= 0.0)) throw ParameterError("initial noise must be nonnegative");
  P.validate();
  opts.validate();

  MultistartResult out;
  out.runs.resize(seeds.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < seeds.size(); i = next++) {
      SeedRun& run = out.runs[i];
      run.seed_index = i;
      run.seed = seeds[i];
      try {
        ScalarField u0 = build_peak(grid, {seeds[i], P.epsilon, mopts.cutoff_radius}, U);
        if (mopts.initial_noise > 0.0) {
          std::mt19937_64 rng(mopts.rng_seed + i);
          std::uniform_real_distribution<double> unit(-1.0, 1.0);
          const double amp = mopts.initial_noise * U.u0;
          u0 = u0.map([&](double v) { return v + amp * unit(rng); });
        }
        SolverOptions local = opts;
        std::ostringstream log;
        local.log = mopts.collect_logs ? &log : nullptr;
        run.report = minimize_from(u0, P, local);
        run.log = log.str();
      } catch (const ParameterError& e) {
        run.error = e.what();
        run.error_code = 2;
      } catch (const std::exception& e) {
        run.error = e.what();
        run.error_code = 3;
      }
    }
  };
  const int n_workers = std::min<int>(mopts.threads, static_cast<int>(seeds.size()));
  {
    std::vector<std::jthread> pool;
    for (int w = 1; w < n_workers; ++w) pool.emplace_back(worker);
    worker();
  }

  std::vector<std::size_t> ok;
  for (std::size_t i = 0; i < out.runs.size(); ++i) {
    if (out.runs[i].report) ok.push_back(i);
  }
  std::stable_sort(ok.begin(), ok.end(), [&](std::size_t x, std::size_t y) {
    return out.runs[x].report->energy < out.runs[y].report->energy;
  });

  const double diag = std::sqrt(3.0) * grid.spacing();
  std::vector<TorusPoint> centres(out.runs.size());
  std::vector<bool> has_centre(out.runs.size(), false);
  for (std::size_t i : ok) {
    try {
      centres[i] = barycenter(out.runs[i].report->field, P.p);
      has_centre[i] = true;
    } catch (const BarycenterUndefined&) {
    }
  }
  auto same_shape = [&](std::size_t x, std::size_t y) {
    if (!has_centre[x] || !has_centre[y]) {
      const auto& fx = out.runs[x].report->field;
      return l2_norm(fx - out.runs[y].report->field) < mopts.dedup_tol * l2_norm(fx);
    }
    return aligned_difference(out.runs[x].report->field, out.runs[y].report->field, P.p) <
           mopts.dedup_tol;
  };

  std::vector<std::size_t> classes;
  for (std::size_t i : ok) {
    bool duplicate = false;
    for (std::size_t j : out.distinct) {
      const bool near = !has_centre[i] || !has_centre[j] ||
                        grid.distance(centres[i], centres[j]) <= diag;
      if (near && same_shape(i, j)) {
        duplicate = true;
        break;
      }
    }
    if (duplicate) continue;
    out.distinct.push_back(i);
    if (std::none_of(classes.begin(), classes.end(), [&](std::size_t j) { return same_shape(i, j); })) {
      classes.push_back(i);
    }
  }
  out.translation_classes = static_cast<int>(classes.size());
  return out;
}

double peak_width_points(const ScalarField& u) {
  const TorusGrid& g = u.grid();
  const int n = g.n();
  const MaxPoint mp = max_point(u);
  const double half = 0.5 * mp.value;
  if (!(mp.value > 0.0)) return 0.0;
  const auto c = g.multi_index(mp.index);
  double width = std::numeric_limits<double>::infinity();
  for (int axis = 0; axis < 3; ++axis) {
    auto at = [&](int offset) {
      auto m = c;
      m[axis] = ((m[axis] + offset) % n + n) % n;
      return u[g.index(m[0], m[1], m[2])];
    };
    double w = 0.0;
    for (int dir : {-1, 1}) {
      int s = 1;
      while (s < n / 2 && at(dir * s) > half) ++s;
      const double inner = at(dir * (s - 1));
      const double outer = at(dir * s);
      const double frac = inner > outer ? (inner - half) / (inner - outer) : 1.0;
      w += (s - 1) + std::clamp(frac, 0.0, 1.0);
    }
    width = std::min(width, w);
  }
  return width;
}

}  // namespace sbpp
