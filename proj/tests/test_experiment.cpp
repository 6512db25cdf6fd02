#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "experiment.hpp"
#include "sbpp/errors.hpp"

using namespace sbpp;
using namespace sbpp::experiment;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("sbpp_test_experiment_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

ExperimentConfig small_config(const fs::path& out) {
  ExperimentConfig cfg;
  std::istringstream text(
      "# coarse grid, two peaks\n"
      "n_per_axis = 32\n"
      "period_length = 2pi\n"
      "epsilon_list = 0.35, 0.3\n"
      "seed_points = 0 0 0, 1pi 1pi 0\n");
  load_config(cfg, text);
  cfg.output_dir = out;
  return cfg;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(SBPP_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("config parsing") {
  ExperimentConfig cfg;
  CHECK(cfg.period_length == doctest::Approx(2 * std::numbers::pi));
  CHECK(cfg.seeds().size() == 4);
  CHECK_NOTHROW(cfg.validate());

  std::istringstream text(
      "p = 5.5   # trailing comment\n"
      "a=0.1\n"
      "\n"
      "period_length = 4*pi\n"
      "epsilon_list = 0.5, 0.25,0.125\n"
      "seed_points = 0 0 0, 1 2 3\n"
      "dealiasing = three_halves\n"
      "max_iters = 12\n"
      "rng_seed = 42\n");
  load_config(cfg, text);
  CHECK(cfg.p == 5.5);
  CHECK(cfg.a == 0.1);
  CHECK(cfg.period_length == doctest::Approx(4 * std::numbers::pi).epsilon(1e-15));
  CHECK(cfg.epsilon_list == std::vector<double>{0.5, 0.25, 0.125});
  REQUIRE(cfg.seed_points.size() == 2);
  CHECK(cfg.seed_points[1] == TorusPoint{1, 2, 3});
  CHECK(cfg.dealiasing == Dealiasing::three_halves);
  CHECK(cfg.solver.max_iters == 12);
  CHECK(cfg.rng_seed == 42);

  ExperimentConfig again;
  std::istringstream round(format_config(cfg));
  load_config(again, round);
  CHECK(format_config(again) == format_config(cfg));

  CHECK_THROWS_AS(apply_setting(cfg, "colour", "red"), ParameterError);
  CHECK_THROWS_AS(apply_setting(cfg, "p", "five"), ParameterError);
  CHECK_THROWS_AS(apply_setting(cfg, "seed_points", "1 2"), ParameterError);
  CHECK_THROWS_AS(apply_setting(cfg, "dealiasing", "twice"), ParameterError);
  std::istringstream broken("p 5\n");
  CHECK_THROWS_AS(load_config(cfg, broken), ParameterError);
  CHECK_THROWS_AS(load_config(cfg, fs::path("/nonexistent/sbpp.cfg")), ParameterError);
}

TEST_CASE("config validation") {
  ExperimentConfig cfg;
  cfg.epsilon_list = {};
  CHECK_THROWS_AS(cfg.validate(), ParameterError);
  cfg.epsilon_list = {0.2, 0.3};
  CHECK_THROWS_AS(cfg.validate(), ParameterError);
  cfg.epsilon_list = {0.3, 0.3};
  CHECK_THROWS_AS(cfg.validate(), ParameterError);
  cfg.epsilon_list = {0.9};
  CHECK_THROWS_AS(cfg.validate(), ParameterError);
  cfg.epsilon_list = {0.3};
  cfg.p = 3.0;
  CHECK_THROWS_AS(cfg.validate(), ParameterError);
  cfg.p = 5.0;
  cfg.n_per_axis = 63;
  CHECK_THROWS_AS(cfg.validate(), ParameterError);
  cfg.n_per_axis = 64;
  CHECK_NOTHROW(cfg.validate());

  cfg.epsilon_list = {0.4, 0.3, 0.2, 0.15};
  CHECK(cfg.warnings().size() == 3);
  CHECK(cfg.cutoff_for(0.4) == doctest::Approx(1.6));
  CHECK(cfg.cutoff_for(0.15) == doctest::Approx(std::numbers::pi / 2));
}

TEST_CASE("ground-state artefacts") {
  const auto out = scratch("gs");
  ExperimentConfig cfg;
  cfg.output_dir = out;
  const auto s = run_ground_state(cfg);
  CHECK(s.nehari_identity_error < 1e-6);
  CHECK(s.m_infinity == doctest::Approx(9.58259009).epsilon(1e-7));
  const auto first = slurp(out / "ground_state.txt");
  const auto json_first = slurp(out / "ground_state.json");
  run_ground_state(cfg);
  CHECK(slurp(out / "ground_state.txt") == first);
  CHECK(slurp(out / "ground_state.json") == json_first);
  const auto j = nlohmann::json::parse(json_first);
  CHECK(j["u0"].get<double>() == doctest::Approx(5.2238786).epsilon(1e-7));

  cfg.p = 3.0;
  CHECK_THROWS_AS(run_ground_state(cfg), ParameterError);
}

TEST_CASE("sweep artefacts are deterministic and reloadable") {
  const auto out = scratch("sweep");
  std::ostringstream log;
  const auto cfg = small_config(out);
  const auto result = run_sweep(cfg, log);
  REQUIRE(result.rows.size() == 4);
  const std::string csv = slurp(result.csv_path);
  CHECK(csv.substr(0, csv.find('\n')) == csv_header());
  CHECK(csv.substr(0, 60).find("epsilon,seed_index,status,t_W,energy,m_eps_estimate") == 0);

  for (const auto& row : result.rows) {
    CHECK(row.status == "converged");
    CHECK(row.diagnostics.n_local_maxima == 1);
    CHECK(row.distinct);
    REQUIRE_FALSE(row.field_file.empty());
    // energy re-evaluated from the dump matches the logged value
    const FieldDump dump = read_field_dump((out / row.field_file).string());
    CHECK(dump.epsilon == row.epsilon);
    const double e = energy(dump.field, cfg.params(dump.epsilon));
    CHECK(std::abs(e - row.energy) <= 1e-9 * std::abs(row.energy));
  }
  CHECK(result.rows[0].m_eps_estimate == std::min(result.rows[0].energy, result.rows[1].energy));
  CHECK(fs::exists(out / "sweep_summary.json"));
  CHECK(fs::exists(out / "logs" / "eps0.35_seed1.jsonl"));
  const auto summary = nlohmann::json::parse(slurp(out / "sweep_summary.json"));
  CHECK(summary["epsilons"].size() == 2);

  const auto out2 = scratch("sweep_rerun");
  auto cfg2 = cfg;
  cfg2.output_dir = out2;
  cfg2.threads = 2;
  run_sweep(cfg2, log);
  CHECK(slurp(out2 / "sweep.csv") == csv);
  CHECK(slurp(out2 / "fields" / "eps0.3_seed0.sbpf") == slurp(out / "fields" / "eps0.3_seed0.sbpf"));

  // profile-check on the dumps
  const auto checks = run_profile_check(cfg, {out / result.rows[3].field_file});
  REQUIRE(checks.size() == 1);
  CHECK(checks[0].energy == doctest::Approx(result.rows[3].energy).epsilon(1e-12));
  CHECK(std::abs(checks[0].nehari_residual) < 1e-9 * checks[0].energy);
  REQUIRE(checks[0].diagnostics.has_value());
  CHECK(checks[0].diagnostics->profile_error == doctest::Approx(result.rows[3].diagnostics.profile_error));
  CHECK(fs::exists(out / "profile_check.jsonl"));
}

TEST_CASE("solve with initial noise depends only on rng_seed") {
  auto cfg = small_config(scratch("solve_a"));
  cfg.seed_points = {{0, 0, 0}};
  cfg.initial_noise = 1e-3;
  cfg.rng_seed = 7;
  std::ostringstream log;
  const auto a = run_solve(cfg, 0.35, log);
  REQUIRE(a.rows.size() == 1);
  CHECK(a.rows[0].epsilon == 0.35);
  CHECK(a.rows[0].status == "converged");
  const auto text_a = slurp(a.csv_path);
  cfg.output_dir = scratch("solve_b");
  const auto b = run_solve(cfg, 0.35, log);
  CHECK(slurp(b.csv_path) == text_a);
  cfg.output_dir = scratch("solve_c");
  cfg.rng_seed = 8;
  const auto c = run_solve(cfg, 0.35, log);
  CHECK(slurp(c.csv_path) != text_a);
  CHECK(c.rows[0].energy == doctest::Approx(a.rows[0].energy).epsilon(1e-6));
  CHECK(fs::exists(cfg.output_dir / "diagnostics.jsonl"));
}

TEST_CASE("constant-branch report") {
  ExperimentConfig cfg;
  cfg.output_dir = scratch("cb");
  cfg.epsilon_list = {1.0, 0.5, 0.25};
  const auto rep = run_constant_branch(cfg);
  CHECK(rep.branch.c_star == doctest::Approx(12.5727).epsilon(1e-5));
  CHECK(rep.scaling_spread < 1e-12);
  CHECK(rep.energies[1] / rep.energies[0] == doctest::Approx(8.0).epsilon(1e-12));
  CHECK(rep.energies[2] / rep.energies[0] == doctest::Approx(64.0).epsilon(1e-12));
  cfg.p = 5.9;
  const auto hi = run_constant_branch(cfg);
  CHECK(std::isfinite(hi.branch.c_star));
  CHECK(hi.branch.c_star > std::pow(4 * std::numbers::pi, 1 / 1.9));
}

TEST_CASE("command line exit codes") {
  const auto out = scratch("cli");
  const std::string o = " --out " + out.string();
  CHECK(run_cli("ground-state --p 5" + o) == 0);
  CHECK(fs::exists(out / "ground_state.json"));
  CHECK(run_cli("ground-state --p 3" + o) == 2);
  CHECK(run_cli("ground-state --p 5 --tol 0" + o) == 2);
  CHECK(run_cli("constant-branch --p 5 --eps 1,0.5,0.25" + o) == 0);
  CHECK(run_cli("sweep --set epsilon_list=" + o) == 2);
  CHECK(run_cli("sweep --config /nonexistent.cfg" + o) == 2);
  CHECK(run_cli("no-such-command") == 2);
  CHECK(run_cli("profile-check" + o) == 2);
  CHECK(run_cli("--help") == 0);

  // a truncated dump is a validation failure
  {
    std::ofstream bad(out / "bad.sbpf", std::ios::binary);
    bad << "SBPF";
  }
  CHECK(run_cli("profile-check " + (out / "bad.sbpf").string() + o) == 2);
  // [1.001, 2] does not bracket U(0) = 5.22: a numerical failure
  CHECK(run_cli("ground-state --p 5 --set u0_bracket=1.001,2" + o) == 3);
  CHECK(run_cli("ground-state --p 5 --set u0_bracket=2,1.5" + o) == 2);
}
