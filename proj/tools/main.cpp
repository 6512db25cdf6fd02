// sbpp: batch driver for ground states, epsilon sweeps and diagnostics.
//
// Exit status: 0 success, 2 invalid input, 3 numerical failure, 1 other errors.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "experiment.hpp"
#include "sbpp/errors.hpp"

namespace {

constexpr int kValidation = 2;
constexpr int kNumerical = 3;

}  // namespace

int main(int argc, char** argv) {
  using namespace sbpp;
  using namespace sbpp::experiment;

  CLI::App app{"Pseudospectral Schrodinger-Bopp-Podolsky-Proca laboratory on the 3-torus"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string out_dir;
  std::optional<long long> seed;
  std::optional<int> threads;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "key = value configuration file");
  app.add_option("--out", out_dir, "output directory (overrides output_dir)");
  app.add_option("--seed", seed, "rng_seed override");
  app.add_option("--threads", threads, "worker threads for multistart");
  app.add_option("--set", overrides, "extra key=value overrides, applied last");

  auto* gs = app.add_subcommand("ground-state", "radial ground state table and summary");
  std::optional<double> gs_p;
  std::optional<double> gs_tol;
  gs->add_option("--p", gs_p, "exponent p in (4, 6)");
  gs->add_option("--tol", gs_tol, "bisection tolerance on U(0)");

  auto* sweep = app.add_subcommand("sweep", "psi_map checks and multistart over epsilon_list");

  auto* solve = app.add_subcommand("solve", "multistart at a single epsilon");
  std::optional<double> solve_eps;
  solve->add_option("--eps", solve_eps, "epsilon (default: smallest of epsilon_list)");

  auto* cb = app.add_subcommand("constant-branch", "constant solution and its energy scaling");
  std::optional<double> cb_p;
  std::vector<double> cb_eps;
  cb->add_option("--p", cb_p, "exponent p in (4, 6)");
  cb->add_option("--eps", cb_eps, "epsilon values")->delimiter(',');

  auto* check = app.add_subcommand("profile-check", "diagnostics of dumped fields");
  std::vector<std::string> files;
  check->add_option("files", files, "SBPF field dumps")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kValidation;
  }

  try {
    ExperimentConfig cfg;
    if (!config_path.empty()) load_config(cfg, config_path);
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    if (seed) apply_setting(cfg, "rng_seed", std::to_string(*seed));
    if (threads) apply_setting(cfg, "threads", std::to_string(*threads));
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ParameterError("--set expects key=value, got " + kv);
      apply_setting(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }

    if (*gs) {
      if (gs_p) cfg.p = *gs_p;
      if (gs_tol) cfg.ground_state_tol = *gs_tol;
      std::cout << to_json(run_ground_state(cfg)) << '\n';
    } else if (*sweep) {
      const auto result = run_sweep(cfg, std::cerr);
      std::cout << result.csv_path.string() << '\n';
      for (const auto& row : result.rows) {
        if (row.status == "failed") return kNumerical;
      }
    } else if (*solve) {
      const auto result = run_solve(cfg, solve_eps, std::cerr);
      std::cout << result.csv_path.string() << '\n';
      for (const auto& row : result.rows) {
        if (row.status == "failed") return kNumerical;
      }
    } else if (*cb) {
      if (cb_p) cfg.p = *cb_p;
      if (!cb_eps.empty()) cfg.epsilon_list = cb_eps;
      const auto rep = run_constant_branch(cfg);
      std::cout << "c_star " << rep.branch.c_star << ", scaling spread " << rep.scaling_spread << '\n';
    } else if (*check) {
      std::vector<std::filesystem::path> paths(files.begin(), files.end());
      for (const auto& c : run_profile_check(cfg, paths)) std::cout << to_json(c) << '\n';
    }
  } catch (const ParameterError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
