#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sbpp/errors.hpp"
#include "sbpp/grid_field.hpp"
#include "sbpp/ground_state.hpp"
#include "sbpp/nehari_energy.hpp"

namespace sbpp {

struct SolverOptions {
  int max_iters = 500;
  /// Stop when ‖grad‖_eps / ‖u‖_eps falls below this (and the PDE residual
  /// below ten times it).
  double grad_tol = 1e-8;
  double step_init = 1.0;
  double backtrack_factor = 0.5;
  double armijo_c = 1e-4;
  /// Line search gives up below this step.
  double min_step = 1e-12;
  /// JSON lines {"iter", "energy", "grad_norm", "t"} per iteration when set.
  std::ostream* log = nullptr;

  void validate() const;
};

struct SolveReport {
  ScalarField field;
  SystemParams params;
  double energy;
  /// ‖grad‖_eps / ‖u‖_eps at the returned field.
  double grad_norm;
  /// Relative L2 residual of -eps^2 Lap u + u + phi_u u = (u^+)^(p-1).
  double pde_residual;
  int iterations;
  /// Projection scalings, one per accepted iterate (the first is t_{u0}).
  std::vector<double> t_history;
  std::vector<double> energy_history;
  bool converged;
  /// Coefficient of variation >= 1e-3.
  bool nonconstant;
  /// Grid points across the half-maximum width of the main peak.
  double peak_width_points;
  /// peak_width_points >= 6.
  bool resolved;
};

/// The line search could not decrease J_eps; carries the last accepted iterate.
class NonDescent : public NumericalError {
 public:
  NonDescent(const std::string& what, ScalarField last, int iteration)
      : NumericalError(what), last_(std::move(last)), iteration_(iteration) {}
  const ScalarField& last_iterate() const { return last_; }
  int iteration() const { return iteration_; }

 private:
  ScalarField last_;
  int iteration_;
};

/// Projected Sobolev-gradient descent u <- P_N(u - s grad J_eps(u)) with
/// Armijo backtracking. Throws ProjectionUndefined if u0^+ vanishes.
SolveReport minimize_from(const ScalarField& u0, const SystemParams& P, const SolverOptions& opts);

/// Re-solve at a smaller (or equal) epsilon, optionally on a finer grid of the
/// same period.
SolveReport continue_in_epsilon(const SolveReport& previous, const SystemParams& next,
                                const SolverOptions& opts,
                                std::optional<TorusGrid> grid = std::nullopt);

/// Outcome of one seed. Exactly one of report / error is meaningful.
struct SeedRun {
  std::size_t seed_index;
  TorusPoint seed;
  std::optional<SolveReport> report;
  std::string error;
  /// 2 for parameter errors, 3 for numerical failures, 0 on success.
  int error_code = 0;
  /// JSON-lines iteration log when MultistartOptions::collect_logs is set.
  std::string log;
};

struct MultistartResult {
  /// One entry per seed, in seed order.
  std::vector<SeedRun> runs;
  /// Indices into runs of the distinct solutions, sorted by energy.
  std::vector<std::size_t> distinct;
  /// Number of classes left after identifying translates of one another.
  int translation_classes = 0;
};

struct MultistartOptions {
  double cutoff_radius;
  int threads = 1;
  /// Relative L2 difference below which two aligned solutions coincide.
  double dedup_tol = 1e-4;
  /// Amplitude, relative to U(0), of uniform noise added to each initial peak;
  /// seed i draws from mt19937_64(rng_seed + i).
  double initial_noise = 0.0;
  std::uint64_t rng_seed = 0;
  bool collect_logs = false;
};

/// Runs minimize_from(build_peak(seed)) per seed on a bounded worker pool.
/// Two results are duplicates when their barycenters lie within one grid
/// diagonal and they agree to dedup_tol after the best cell shift.
MultistartResult multistart(const std::vector<TorusPoint>& seeds, const TorusGrid& grid,
                            const SystemParams& P, const RadialProfile& U,
                            const SolverOptions& opts, const MultistartOptions& mopts);

/// Smallest relative L2 difference ‖a - shift(b)‖ / ‖a‖ over cell shifts
/// within one cell of the barycentre alignment.
double aligned_difference(const ScalarField& a, const ScalarField& b, double p);

/// Grid points across the half-maximum width of the peak at the global
/// maximum, the minimum over the three axes.
double peak_width_points(const ScalarField& u);

}  // namespace sbpp
