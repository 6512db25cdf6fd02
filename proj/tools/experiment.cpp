#include "experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sbpp/errors.hpp"

namespace sbpp::experiment {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
  throw ParameterError("config: cannot parse " + key + " = '" + value + "'");
}

double parse_real(const std::string& key, const std::string& text) {
  std::string t = trim(text);
  double scale = 1.0;
  if (t.size() >= 2 && t.compare(t.size() - 2, 2, "pi") == 0) {
    scale = std::numbers::pi;
    t = trim(t.substr(0, t.size() - 2));
    if (!t.empty() && t.back() == '*') t = trim(t.substr(0, t.size() - 1));
    if (t.empty()) return scale;
  }
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size()) bad_value(key, text);
  return v * scale;
}

long long parse_int(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size()) bad_value(key, text);
  return v;
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_text(std::string s) {
  std::replace_if(s.begin(), s.end(), [](char c) { return c == ',' || c == '\n' || c == '\r'; }, ';');
  return s;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

/// JSON numbers cannot be NaN; those become null.
json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string eps_tag(double eps) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", eps);
  return buf;
}

RadialProfile ground_state_for(const ExperimentConfig& cfg) {
  return find_ground_state_in(cfg.p, cfg.u0_low, cfg.u0_high, cfg.ground_state_tol);
}

ProfileDiagnostics nan_diagnostics() {
  return {{kNaN, kNaN, kNaN}, kNaN, 0, {kNaN, kNaN, kNaN}, {kNaN, kNaN, kNaN}, kNaN, kNaN, kNaN};
}

struct EpsilonSummary {
  double epsilon;
  double t_w, w_norm_ratio, w_coupling, psi_energy, m_eps_estimate;
  int converged;
  int distinct;
  int translation_classes;
  bool eps_resolved;
};

/// Runs one epsilon: psi_map per seed and a multistart. Writes field dumps
/// and iteration logs below out.
std::vector<SweepRow> run_epsilon(const ExperimentConfig& cfg, const RadialProfile& U, double eps,
                                  const fs::path& out, std::ostream& log, EpsilonSummary& summary) {
  const TorusGrid grid = cfg.grid();
  const SystemParams P = cfg.params(eps);
  const double r = cfg.cutoff_for(eps);
  const double h1 = h1_norm_sq(U);
  const double minf = limit_energy(U);
  const auto seeds = cfg.seeds();
  const bool eps_resolved = eps >= 4.0 * grid.spacing();

  MultistartOptions mo{r, cfg.threads};
  mo.initial_noise = cfg.initial_noise;
  mo.rng_seed = cfg.rng_seed;
  mo.collect_logs = true;
  const MultistartResult ms = multistart(seeds, grid, P, U, cfg.solver, mo);

  std::vector<SweepRow> rows;
  double m_eps = std::numeric_limits<double>::infinity();
  int converged = 0;
  for (const SeedRun& run : ms.runs) {
    SweepRow row{};
    row.epsilon = eps;
    row.seed_index = run.seed_index;
    row.seed = run.seed;
    row.eps_resolved = eps_resolved;
    row.diagnostics = nan_diagnostics();
    row.energy = row.energy_ratio = row.min_value = row.grad_norm = row.pde_residual = kNaN;
    row.peak_width_points = kNaN;
    try {
      const ScalarField W = build_peak(grid, {run.seed, eps, r}, U);
      const EnergyParts parts = energy_parts(W, P);
      const NehariProjection proj = project_nehari(W, P);
      row.t_w = proj.t;
      row.w_norm_ratio = parts.A / h1;
      row.w_coupling = parts.B;
      row.psi_energy = proj.energy;
    } catch (const std::exception&) {
      row.t_w = row.w_norm_ratio = row.w_coupling = row.psi_energy = kNaN;
    }
    if (!run.report) {
      row.status = "failed";
      row.message = run.error;
      rows.push_back(row);
      continue;
    }
    const SolveReport& rep = *run.report;
    row.status = rep.converged ? "converged" : "not_converged";
    row.energy = rep.energy;
    row.energy_ratio = rep.energy / minf;
    row.min_value = rep.field.min();
    row.iterations = rep.iterations;
    row.grad_norm = rep.grad_norm;
    row.pde_residual = rep.pde_residual;
    row.peak_width_points = rep.peak_width_points;
    row.resolved = rep.resolved;
    row.distinct = std::find(ms.distinct.begin(), ms.distinct.end(), run.seed_index) != ms.distinct.end();
    try {
      row.diagnostics = diagnose(rep.field, P, U, r);
    } catch (const NumericalError& e) {
      row.message = e.what();
      const MaxPoint mp = max_point(rep.field);
      row.diagnostics.max_point = mp.point;
      row.diagnostics.max_value = mp.value;
      row.diagnostics.n_local_maxima = mp.n_local_maxima;
    }
    if (!rep.nonconstant) row.message = row.message.empty() ? "constant" : row.message + "; constant";
    const std::string stem = "eps" + eps_tag(eps) + "_seed" + std::to_string(run.seed_index);
    row.field_file = (fs::path("fields") / (stem + ".sbpf")).generic_string();
    write_field_dump((out / row.field_file).string(), rep.field, eps);
    write_text(out / "logs" / (stem + ".jsonl"), run.log);
    if (rep.converged) {
      ++converged;
      m_eps = std::min(m_eps, rep.energy);
    }
    rows.push_back(row);
  }
  if (!std::isfinite(m_eps)) m_eps = kNaN;
  for (auto& row : rows) row.m_eps_estimate = m_eps;

  summary = {eps,
             rows.empty() ? kNaN : rows.front().t_w,
             rows.empty() ? kNaN : rows.front().w_norm_ratio,
             rows.empty() ? kNaN : rows.front().w_coupling,
             rows.empty() ? kNaN : rows.front().psi_energy,
             m_eps,
             converged,
             static_cast<int>(ms.distinct.size()),
             ms.translation_classes,
             eps_resolved};
  log << "eps " << eps << ": " << converged << "/" << rows.size() << " converged, "
      << ms.distinct.size() << " distinct, min energy / m_inf = " << m_eps / minf << '\n';
  return rows;
}

json summary_json(const EpsilonSummary& s) {
  json j;
  j["epsilon"] = s.epsilon;
  j["t_W"] = num(s.t_w);
  j["W_norm_ratio"] = num(s.w_norm_ratio);
  j["W_coupling"] = num(s.w_coupling);
  j["psi_energy"] = num(s.psi_energy);
  j["m_eps_estimate"] = num(s.m_eps_estimate);
  j["converged"] = s.converged;
  j["distinct"] = s.distinct;
  j["translation_classes"] = s.translation_classes;
  j["eps_resolved"] = s.eps_resolved;
  return j;
}

void prepare_output(const ExperimentConfig& cfg) {
  fs::create_directories(cfg.output_dir / "fields");
  fs::create_directories(cfg.output_dir / "logs");
  write_text(cfg.output_dir / "config.txt", format_config(cfg));
}

std::string rows_csv(const std::vector<SweepRow>& rows) {
  std::string text = csv_header() + "\n";
  for (const auto& row : rows) text += csv_row(row) + "\n";
  return text;
}

}  // namespace

// --- configuration -------------------------------------------------------------

ExperimentConfig::ExperimentConfig() : period_length(2.0 * std::numbers::pi) {}

TorusGrid ExperimentConfig::grid() const { return TorusGrid(n_per_axis, period_length); }

SystemParams ExperimentConfig::params(double epsilon) const {
  return SystemParams::checked(p, a, epsilon, dealiasing);
}

std::vector<TorusPoint> ExperimentConfig::seeds() const {
  if (!seed_points.empty()) return seed_points;
  const double h = 0.5 * period_length;
  return {{0.0, 0.0, 0.0}, {h, h, 0.0}, {h, 0.0, h}, {0.0, h, h}};
}

double ExperimentConfig::cutoff_for(double epsilon) const { return cutoff_for(grid(), epsilon); }

double ExperimentConfig::cutoff_for(const TorusGrid& g, double epsilon) const {
  const double base = cutoff_radius > 0.0 ? cutoff_radius : default_cutoff_radius(g);
  return std::min(std::max(base, 4.0 * epsilon), 0.5 * g.length());
}

void ExperimentConfig::validate() const {
  grid();
  if (epsilon_list.empty()) throw ParameterError("epsilon_list must not be empty");
  for (std::size_t i = 0; i < epsilon_list.size(); ++i) {
    params(epsilon_list[i]);
    if (i > 0 && !(epsilon_list[i] < epsilon_list[i - 1])) {
      throw ParameterError("epsilon_list must be strictly decreasing");
    }
    if (4.0 * epsilon_list[i] > 0.5 * period_length) {
      throw ParameterError("epsilon " + eps_tag(epsilon_list[i]) + " exceeds L/8: no admissible cutoff");
    }
  }
  for (const auto& x : seeds()) {
    if (!std::isfinite(x[0]) || !std::isfinite(x[1]) || !std::isfinite(x[2])) {
      throw ParameterError("seed points must be finite");
    }
  }
  if (cutoff_radius > 0.5 * period_length) throw ParameterError("cutoff_radius exceeds L/2");
  if (dealiasing == Dealiasing::three_halves && n_per_axis % 4 != 0) {
    throw ParameterError("3/2 dealiasing needs n_per_axis divisible by 4");
  }
  solver.validate();
  if (threads < 1) throw ParameterError("threads must be at least 1");
  if (!(initial_noise >= 0.0)) throw ParameterError("initial_noise must be nonnegative");
  if (!(ground_state_tol > 0.0)) throw ParameterError("ground_state_tol must be positive");
}

std::vector<std::string> ExperimentConfig::warnings() const {
  std::vector<std::string> out;
  const double h = period_length / n_per_axis;
  for (double eps : epsilon_list) {
    if (eps < 4.0 * h) {
      out.push_back("epsilon " + eps_tag(eps) + " is below 4h = " + eps_tag(4.0 * h) +
                    "; the peak is under-resolved");
    }
  }
  return out;
}

void apply_setting(ExperimentConfig& cfg, const std::string& raw_key, const std::string& value) {
  const std::string key = trim(raw_key);
  if (key == "p") {
    cfg.p = parse_real(key, value);
  } else if (key == "a") {
    cfg.a = parse_real(key, value);
  } else if (key == "period_length") {
    cfg.period_length = parse_real(key, value);
  } else if (key == "n_per_axis") {
    cfg.n_per_axis = static_cast<int>(parse_int(key, value));
  } else if (key == "epsilon_list") {
    cfg.epsilon_list.clear();
    for (const auto& item : split(value, ',')) {
      if (!item.empty()) cfg.epsilon_list.push_back(parse_real(key, item));
    }
  } else if (key == "seed_points") {
    cfg.seed_points.clear();
    for (const auto& item : split(value, ',')) {
      if (item.empty()) continue;
      std::istringstream in(item);
      std::vector<std::string> parts;
      for (std::string w; in >> w;) parts.push_back(w);
      if (parts.size() != 3) bad_value(key, item);
      cfg.seed_points.push_back(
          {parse_real(key, parts[0]), parse_real(key, parts[1]), parse_real(key, parts[2])});
    }
  } else if (key == "cutoff_radius") {
    cfg.cutoff_radius = parse_real(key, value);
  } else if (key == "dealiasing") {
    const std::string v = trim(value);
    if (v == "none") cfg.dealiasing = Dealiasing::none;
    else if (v == "three_halves") cfg.dealiasing = Dealiasing::three_halves;
    else bad_value(key, value);
  } else if (key == "max_iters") {
    cfg.solver.max_iters = static_cast<int>(parse_int(key, value));
  } else if (key == "grad_tol") {
    cfg.solver.grad_tol = parse_real(key, value);
  } else if (key == "step_init") {
    cfg.solver.step_init = parse_real(key, value);
  } else if (key == "backtrack_factor") {
    cfg.solver.backtrack_factor = parse_real(key, value);
  } else if (key == "armijo_c") {
    cfg.solver.armijo_c = parse_real(key, value);
  } else if (key == "output_dir") {
    cfg.output_dir = trim(value);
  } else if (key == "rng_seed") {
    const long long s = parse_int(key, value);
    if (s < 0) bad_value(key, value);
    cfg.rng_seed = static_cast<std::uint64_t>(s);
  } else if (key == "initial_noise") {
    cfg.initial_noise = parse_real(key, value);
  } else if (key == "ground_state_tol") {
    cfg.ground_state_tol = parse_real(key, value);
  } else if (key == "u0_bracket") {
    const auto items = split(value, ',');
    if (items.size() != 2) bad_value(key, value);
    cfg.u0_low = parse_real(key, items[0]);
    cfg.u0_high = parse_real(key, items[1]);
  } else if (key == "threads") {
    cfg.threads = static_cast<int>(parse_int(key, value));
  } else {
    throw ParameterError("config: unknown key '" + key + "'");
  }
}

void load_config(ExperimentConfig& cfg, std::istream& in) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParameterError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    apply_setting(cfg, line.substr(0, eq), line.substr(eq + 1));
  }
}

void load_config(ExperimentConfig& cfg, const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open config file " + path.string());
  load_config(cfg, in);
}

std::string format_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  auto list = [](const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
    return s;
  };
  out << "p = " << fmt(cfg.p) << '\n'
      << "a = " << fmt(cfg.a) << '\n'
      << "period_length = " << fmt(cfg.period_length) << '\n'
      << "n_per_axis = " << cfg.n_per_axis << '\n'
      << "epsilon_list = " << list(cfg.epsilon_list) << '\n';
  out << "seed_points = ";
  const auto seeds = cfg.seeds();
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    out << (i ? ", " : "") << fmt(seeds[i][0]) << ' ' << fmt(seeds[i][1]) << ' ' << fmt(seeds[i][2]);
  }
  out << '\n'
      << "cutoff_radius = " << fmt(cfg.cutoff_radius) << '\n'
      << "dealiasing = " << (cfg.dealiasing == Dealiasing::none ? "none" : "three_halves") << '\n'
      << "max_iters = " << cfg.solver.max_iters << '\n'
      << "grad_tol = " << fmt(cfg.solver.grad_tol) << '\n'
      << "step_init = " << fmt(cfg.solver.step_init) << '\n'
      << "backtrack_factor = " << fmt(cfg.solver.backtrack_factor) << '\n'
      << "armijo_c = " << fmt(cfg.solver.armijo_c) << '\n'
      << "rng_seed = " << cfg.rng_seed << '\n'
      << "initial_noise = " << fmt(cfg.initial_noise) << '\n'
      << "ground_state_tol = " << fmt(cfg.ground_state_tol) << '\n'
      << "u0_bracket = " << fmt(cfg.u0_low) << ", " << fmt(cfg.u0_high) << '\n';
  return out.str();
}

// --- ground-state ----------------------------------------------------------------

GroundStateSummary run_ground_state(const ExperimentConfig& cfg) {
  if (!(cfg.ground_state_tol > 0.0)) throw ParameterError("ground_state_tol must be positive");
  GroundStateSummary s{ground_state_for(cfg), 0.0, 0.0, 0.0};
  s.m_infinity = limit_energy(s.profile);
  s.m_infinity_h1 = limit_energy_h1(s.profile);
  s.nehari_identity_error = nehari_identity_error(s.profile);
  fs::create_directories(cfg.output_dir);
  write_profile((cfg.output_dir / "ground_state.txt").string(), s.profile);
  write_text(cfg.output_dir / "ground_state.json", to_json(s) + "\n");
  return s;
}

std::string to_json(const GroundStateSummary& s) {
  json j;
  j["p"] = s.profile.p;
  j["u0"] = s.profile.u0;
  j["m_infinity"] = s.m_infinity;
  j["m_infinity_h1"] = s.m_infinity_h1;
  j["nehari_identity_error"] = s.nehari_identity_error;
  j["h1_norm_sq"] = h1_norm_sq(s.profile);
  j["lp_integral"] = lp_integral(s.profile);
  j["half_max_radius"] = half_max_radius(s.profile);
  j["decay_rate"] = s.profile.decay_rate;
  j["tail_amplitude"] = s.profile.tail_amplitude;
  j["splice_radius"] = s.profile.splice_radius();
  return j.dump(2);
}

// --- sweep / solve -------------------------------------------------------------------

std::string csv_header() {
  return "epsilon,seed_index,status,t_W,energy,m_eps_estimate,concentration_ratio,profile_error,"
         "phi_c2,n_local_maxima,barycenter_x,barycenter_y,barycenter_z,seed_x,seed_y,seed_z,"
         "W_norm_ratio,W_coupling,psi_energy,energy_ratio,max_value,min_value,max_point_x,"
         "max_point_y,max_point_z,iterations,grad_norm,pde_residual,distinct,peak_width_points,"
         "resolved,eps_resolved,field_file,message";
}

std::string csv_row(const SweepRow& r) {
  const auto& d = r.diagnostics;
  std::vector<std::string> c{fmt(r.epsilon),
                             std::to_string(r.seed_index),
                             r.status,
                             fmt(r.t_w),
                             fmt(r.energy),
                             fmt(r.m_eps_estimate),
                             fmt(d.concentration_ratio),
                             fmt(d.profile_error),
                             fmt(d.phi_c2),
                             std::to_string(d.n_local_maxima),
                             fmt(d.barycenter[0]),
                             fmt(d.barycenter[1]),
                             fmt(d.barycenter[2]),
                             fmt(r.seed[0]),
                             fmt(r.seed[1]),
                             fmt(r.seed[2]),
                             fmt(r.w_norm_ratio),
                             fmt(r.w_coupling),
                             fmt(r.psi_energy),
                             fmt(r.energy_ratio),
                             fmt(d.max_value),
                             fmt(r.min_value),
                             fmt(d.max_point[0]),
                             fmt(d.max_point[1]),
                             fmt(d.max_point[2]),
                             std::to_string(r.iterations),
                             fmt(r.grad_norm),
                             fmt(r.pde_residual),
                             r.distinct ? "1" : "0",
                             fmt(r.peak_width_points),
                             r.resolved ? "1" : "0",
                             r.eps_resolved ? "1" : "0",
                             csv_text(r.field_file),
                             csv_text(r.message)};
  std::string line;
  for (std::size_t i = 0; i < c.size(); ++i) line += (i ? "," : "") + c[i];
  return line;
}

SweepResult run_sweep(const ExperimentConfig& cfg, std::ostream& log) {
  cfg.validate();
  for (const auto& w : cfg.warnings()) log << "warning: " << w << '\n';
  prepare_output(cfg);
  const RadialProfile U = ground_state_for(cfg);

  SweepResult result{};
  result.m_infinity = limit_energy(U);
  result.h1_norm_sq = h1_norm_sq(U);
  json eps_json = json::array();
  for (double eps : cfg.epsilon_list) {
    EpsilonSummary s{};
    auto rows = run_epsilon(cfg, U, eps, cfg.output_dir, log, s);
    result.translation_classes.push_back(s.translation_classes);
    eps_json.push_back(summary_json(s));
    for (auto& row : rows) result.rows.push_back(std::move(row));
  }
  result.csv_path = cfg.output_dir / "sweep.csv";
  write_text(result.csv_path, rows_csv(result.rows));

  json j;
  j["m_infinity"] = result.m_infinity;
  j["h1_norm_sq"] = result.h1_norm_sq;
  j["u0"] = U.u0;
  j["epsilons"] = eps_json;
  j["warnings"] = cfg.warnings();
  write_text(cfg.output_dir / "sweep_summary.json", j.dump(2) + "\n");
  return result;
}

SweepResult run_solve(const ExperimentConfig& cfg, std::optional<double> epsilon, std::ostream& log) {
  ExperimentConfig single = cfg;
  if (epsilon) single.epsilon_list = {*epsilon};
  else if (!cfg.epsilon_list.empty()) single.epsilon_list = {cfg.epsilon_list.back()};
  single.validate();
  for (const auto& w : single.warnings()) log << "warning: " << w << '\n';
  prepare_output(single);
  const RadialProfile U = ground_state_for(single);

  SweepResult result{};
  result.m_infinity = limit_energy(U);
  result.h1_norm_sq = h1_norm_sq(U);
  EpsilonSummary s{};
  const double eps = single.epsilon_list.front();
  result.rows = run_epsilon(single, U, eps, single.output_dir, log, s);
  result.translation_classes.push_back(s.translation_classes);
  result.csv_path = single.output_dir / "solve.csv";
  write_text(result.csv_path, rows_csv(result.rows));

  std::string lines;
  for (const auto& row : result.rows) {
    if (row.field_file.empty()) continue;
    json d = json::parse(to_json(row.diagnostics), nullptr, false);
    json line;
    line["seed_index"] = row.seed_index;
    line["energy"] = row.energy;
    for (auto it = d.begin(); it != d.end(); ++it) line[it.key()] = it.value();
    lines += line.dump() + "\n";
  }
  write_text(single.output_dir / "diagnostics.jsonl", lines);

  json j = summary_json(s);
  j["m_infinity"] = result.m_infinity;
  write_text(single.output_dir / "solve_summary.json", j.dump(2) + "\n");
  return result;
}

// --- constant-branch --------------------------------------------------------------------

ConstantBranchReport run_constant_branch(const ExperimentConfig& cfg) {
  if (cfg.epsilon_list.empty()) throw ParameterError("epsilon_list must not be empty");
  ConstantBranchReport rep{constant_branch(cfg.p), cfg.epsilon_list, {}, 0.0};
  // A constant is exact on any grid; the smallest admissible one suffices.
  const TorusGrid g(8, cfg.period_length);
  const ScalarField c = ScalarField::constant(g, rep.branch.c_star);
  const double expected = g.volume() * rep.branch.energy_coefficient;
  json energies = json::array();
  for (double eps : cfg.epsilon_list) {
    const double J = energy(c, SystemParams::checked(cfg.p, cfg.a, eps));
    rep.energies.push_back(J);
    const double scaled = J * eps * eps * eps;
    rep.scaling_spread = std::max(rep.scaling_spread, std::abs(scaled - expected) / expected);
    json e;
    e["epsilon"] = eps;
    e["energy"] = J;
    e["energy_times_eps3"] = scaled;
    e["nehari_residual"] = nehari_residual(c, SystemParams::checked(cfg.p, cfg.a, eps));
    energies.push_back(e);
  }
  json j;
  j["p"] = cfg.p;
  j["c_star"] = rep.branch.c_star;
  j["residual"] = rep.branch.residual;
  j["lower_bound"] = std::pow(4.0 * std::numbers::pi, 1.0 / (cfg.p - 4.0));
  j["energy_coefficient"] = rep.branch.energy_coefficient;
  j["volume"] = g.volume();
  j["energies"] = energies;
  j["scaling_spread"] = rep.scaling_spread;
  fs::create_directories(cfg.output_dir);
  write_text(cfg.output_dir / "constant_branch.json", j.dump(2) + "\n");
  if (rep.scaling_spread > 1e-12) {
    throw ConsistencyError("J_eps(c_*) eps^3 is not constant across epsilon_list (spread " +
                           fmt(rep.scaling_spread) + ")");
  }
  return rep;
}

// --- profile-check ------------------------------------------------------------------------

std::vector<ProfileCheck> run_profile_check(const ExperimentConfig& cfg,
                                            const std::vector<fs::path>& files) {
  if (files.empty()) throw ParameterError("profile-check needs at least one field file");
  const RadialProfile U = ground_state_for(cfg);
  std::vector<ProfileCheck> out;
  std::string lines;
  for (const auto& file : files) {
    const FieldDump dump = read_field_dump(file.string());
    const SystemParams P = SystemParams::checked(cfg.p, cfg.a, dump.epsilon, cfg.dealiasing);
    const TorusGrid& g = dump.field.grid();
    ProfileCheck c{file, dump.epsilon, energy(dump.field, P), nehari_residual(dump.field, P),
                   coefficient_of_variation(dump.field), std::nullopt, {}};
    try {
      c.diagnostics = diagnose(dump.field, P, U, cfg.cutoff_for(g, dump.epsilon));
    } catch (const NumericalError& e) {
      c.note = e.what();
    }
    lines += to_json(c) + "\n";
    out.push_back(std::move(c));
  }
  fs::create_directories(cfg.output_dir);
  write_text(cfg.output_dir / "profile_check.jsonl", lines);
  return out;
}

std::string to_json(const ProfileCheck& c) {
  json j;
  j["file"] = c.file.generic_string();
  j["epsilon"] = c.epsilon;
  j["energy"] = c.energy;
  j["nehari_residual"] = c.nehari_residual;
  j["coefficient_of_variation"] = num(c.coefficient_of_variation);
  if (c.diagnostics) {
    j["diagnostics"] = json::parse(to_json(*c.diagnostics));
  } else {
    j["diagnostics"] = nullptr;
    j["note"] = c.note;
  }
  return j.dump();
}

}  // namespace sbpp::experiment
