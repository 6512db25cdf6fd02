#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sbpp/grid_field.hpp"
#include "sbpp/ground_state.hpp"
#include "sbpp/profile_analysis.hpp"
#include "sbpp/variational_solver.hpp"

namespace sbpp::experiment {

/// Flat key = value configuration shared by all subcommands.
///
/// Keys: p, a, period_length, n_per_axis, epsilon_list, seed_points,
/// cutoff_radius, dealiasing, max_iters, grad_tol, step_init,
/// backtrack_factor, armijo_c, output_dir, rng_seed, initial_noise,
/// ground_state_tol, u0_bracket, threads. Arrays are comma separated; a seed point is
/// three space-separated coordinates. Reals accept a trailing "pi".
struct ExperimentConfig {
  double p = 5.0;
  double a = 0.25;
  double period_length;
  int n_per_axis = 64;
  std::vector<double> epsilon_list{0.4, 0.3, 0.2, 0.15};
  /// Empty means the four tetrahedral nodes (0,0,0), (L/2,L/2,0), (L/2,0,L/2), (0,L/2,L/2).
  std::vector<TorusPoint> seed_points;
  /// Peak cutoff radius; not positive means L/4.
  double cutoff_radius = 0.0;
  Dealiasing dealiasing = Dealiasing::none;
  SolverOptions solver;
  std::filesystem::path output_dir = "sbpp_out";
  std::uint64_t rng_seed = 0;
  /// Uniform noise of this amplitude (relative to U(0)) added to every initial peak.
  double initial_noise = 0.0;
  double ground_state_tol = 1e-13;
  /// Initial shooting bracket for U(0).
  double u0_low = 1.001;
  double u0_high = 1000.0;
  int threads = 1;

  ExperimentConfig();

  TorusGrid grid() const;
  SystemParams params(double epsilon) const;
  std::vector<TorusPoint> seeds() const;
  /// max(cutoff_radius or L/4, 4 eps), capped at L/2.
  double cutoff_for(double epsilon) const;
  double cutoff_for(const TorusGrid& grid, double epsilon) const;

  /// Throws ParameterError on the first violated invariant.
  void validate() const;
  /// Non-fatal findings, currently epsilons below 4 h.
  std::vector<std::string> warnings() const;
};

/// Throws ParameterError for unknown keys or malformed values.
void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value);
/// Reads key = value lines ('#' starts a comment) on top of cfg.
void load_config(ExperimentConfig& cfg, std::istream& in);
void load_config(ExperimentConfig& cfg, const std::filesystem::path& path);
/// Canonical key = value rendering (reloadable).
std::string format_config(const ExperimentConfig& cfg);

// --- ground-state ----------------------------------------------------------

struct GroundStateSummary {
  RadialProfile profile;
  double m_infinity;
  double m_infinity_h1;
  double nehari_identity_error;
};

/// Writes ground_state.txt and ground_state.json into output_dir.
GroundStateSummary run_ground_state(const ExperimentConfig& cfg);
std::string to_json(const GroundStateSummary& s);

// --- sweep / solve -----------------------------------------------------------

struct SweepRow {
  double epsilon;
  std::size_t seed_index;
  TorusPoint seed;
  /// converged, not_converged or failed
  std::string status;
  std::string message;
  double t_w;
  /// ‖W‖²_eps / ‖U‖²_{H¹}
  double w_norm_ratio;
  /// (1/eps^3) int W^2 phi_W
  double w_coupling;
  double psi_energy;
  double energy;
  double m_eps_estimate;
  double energy_ratio;
  ProfileDiagnostics diagnostics;
  double min_value;
  int iterations;
  double grad_norm;
  double pde_residual;
  bool distinct;
  double peak_width_points;
  bool resolved;
  bool eps_resolved;
  std::string field_file;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  double m_infinity;
  double h1_norm_sq;
  /// Per epsilon: translation classes among converged runs.
  std::vector<int> translation_classes;
  std::filesystem::path csv_path;
};

/// One psi_map evaluation plus a multistart per epsilon; writes sweep.csv,
/// sweep_summary.json and one SBPF dump per successful run under fields/.
SweepResult run_sweep(const ExperimentConfig& cfg, std::ostream& log);

/// Same as a single-epsilon sweep at eps (the smallest of epsilon_list when unset);
/// writes solve.csv, diagnostics.jsonl and the field dumps.
SweepResult run_solve(const ExperimentConfig& cfg, std::optional<double> epsilon,
                      std::ostream& log);

/// Fixed CSV header shared by sweep and solve.
std::string csv_header();
std::string csv_row(const SweepRow& row);

// --- constant-branch -----------------------------------------------------------

struct ConstantBranchReport {
  ConstantBranch branch;
  std::vector<double> epsilons;
  /// J_eps(c_*) evaluated on the configured grid.
  std::vector<double> energies;
  /// max relative spread of J * eps^3 across the list.
  double scaling_spread;
};

/// Writes constant_branch.json. Throws ConsistencyError if the spread of
/// J * eps^3 exceeds 1e-12.
ConstantBranchReport run_constant_branch(const ExperimentConfig& cfg);

// --- profile-check -------------------------------------------------------------

struct ProfileCheck {
  std::filesystem::path file;
  double epsilon;
  double energy;
  double nehari_residual;
  double coefficient_of_variation;
  /// Empty when the field has no positive part to locate.
  std::optional<ProfileDiagnostics> diagnostics;
  std::string note;
};

/// Reads SBPF dumps and reports energy, Nehari residual and diagnostics;
/// writes profile_check.jsonl.
std::vector<ProfileCheck> run_profile_check(const ExperimentConfig& cfg,
                                            const std::vector<std::filesystem::path>& files);
std::string to_json(const ProfileCheck& c);

}  // namespace sbpp::experiment
