#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "oscillopf/casefile.hpp"
#include "oscillopf/experiments.hpp"

using namespace oscillopf;

namespace {

struct CommonArgs {
  std::string case_path;
  std::string dyn_path;
  double load_scale = 1.0;
  double tol = 1e-8;
  int k = 3;
  int jobs = 0;  // 0 = hardware concurrency; OSCILLOPF_JOBS overrides
};

void add_common(CLI::App* cmd, CommonArgs& a, bool with_k = true) {
  cmd->add_option("--case", a.case_path, "MATPOWER case file")->required();
  cmd->add_option("--dyn", a.dyn_path, "dynamics sidecar file")->required();
  cmd->add_option("--load-scale", a.load_scale, "scale all loads by this factor");
  cmd->add_option("--tol", a.tol, "solver tolerance");
  if (with_k) cmd->add_option("--k", a.k, "number of low-frequency eigensystems");
  cmd->add_option("--jobs", a.jobs, "max concurrent solves (env OSCILLOPF_JOBS overrides)");
}

struct LoadedModels {
  RawCase nominal;
  DynamicParams dyn;
};

LoadedModels load_inputs(const CommonArgs& a) {
  LoadedModels m;
  m.nominal = parse_matpower(read_file(a.case_path));
  m.dyn = load_dynamics(read_file(a.dyn_path), m.nominal);
  return m;
}

RunManifest make_manifest(const std::string& command, const CommonArgs& a,
                          std::map<std::string, std::string> extra) {
  RunManifest man;
  man.command = command;
  man.case_path = a.case_path;
  man.dynamics_path = a.dyn_path;
  man.timestamp = iso_timestamp();
  man.config["load_scale"] = format_double(a.load_scale);
  man.config["tol"] = format_double(a.tol);
  man.config["k"] = std::to_string(a.k);
  for (auto& [k2, v] : extra) man.config[k2] = v;
  return man;
}

void write_with_manifest(const std::string& out_path, const std::string& body,
                         RunManifest man) {
  man.outputs.push_back(out_path);
  write_file(out_path, body);
  write_file(out_path + ".manifest.json", man.to_json() + "\n");
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ','))
    if (!tok.empty()) out.push_back(std::stod(tok));
  return out;
}

std::vector<double> parse_grid(const std::string& s) {
  // "min:max:count"
  double lo, hi;
  int count;
  if (std::sscanf(s.c_str(), "%lf:%lf:%d", &lo, &hi, &count) != 3)
    throw Error("grid must be min:max:count");
  std::vector<double> out;
  for (int i = 0; i < count; ++i)
    out.push_back(count == 1 ? lo : lo + (hi - lo) * i / (count - 1));
  return out;
}

int cmd_opf(const CommonArgs& a, double mu, const std::string& out_path) {
  LoadedModels m = load_inputs(a);
  InstanceConfig cfg;
  cfg.mu = mu;
  cfg.k = a.k;
  cfg.load_scale = a.load_scale;
  cfg.tol = a.tol;
  InstanceResult r = run_opf_instance(m.nominal, m.dyn, cfg);

  RunManifest man = make_manifest("opf", a, {{"mu", format_double(mu)}});
  if (!r.solved()) {
    std::cerr << "opf: solve failed (" << (r.error.empty() ? status_name(r.status) : r.error)
              << ")\n";
    return 1;
  }

  nlohmann::json j = nlohmann::json::parse(r.report.to_json());
  j["status"] = status_name(r.status);
  j["exact"] = r.exact;
  j["objective"] = r.objective;
  j["cost_sdp"] = r.cost_sdp;
  j["stability_sdp"] = r.stability_sdp;
  j["f_y_from_E"] = r.f_y_from_E;
  j["iterations"] = r.iterations;
  j["solve_time_s"] = r.solve_time;
  j["gap"] = r.gap;
  j["manifest"] = nlohmann::json::parse(man.to_json());
  write_file(out_path, j.dump(2) + "\n");

  std::printf("status        %s%s\n", status_name(r.status).c_str(),
              r.exact ? " (exact)" : " (RELAXATION GAP)");
  std::printf("cost f_c      %.6f\n", r.report.cost_recovered);
  std::printf("f_y           %.6f\n", r.report.f_y_recovered);
  std::printf("rank ratios   V %.3e   E %.3e\n", r.rank_ratio_V, r.rank_ratio_E);
  std::printf("pf residual   %.3e pu\n", r.report.max_pf_residual);
  std::printf("iterations    %d   (%.2f s)\n", r.iterations, r.solve_time);
  std::printf("report        %s\n", out_path.c_str());
  if (!r.report.limit_violations.empty()) {
    std::printf("violations    %zu\n", r.report.limit_violations.size());
    for (const auto& lv : r.report.limit_violations)
      std::printf("  %s at %d: %.3e\n", lv.kind.c_str(), lv.id, lv.amount);
  }
  return r.exact ? 0 : 2;
}

int cmd_pareto(const CommonArgs& a, int grid, const std::string& out_path) {
  LoadedModels m = load_inputs(a);
  auto rows = pareto_sweep(m.nominal, m.dyn, a.k, a.load_scale, grid, a.tol,
                           effective_jobs(a.jobs));
  std::string body = csv_join({"mu", "cost", "f_y", "rank_ratio", "status"});
  for (const auto& r : rows)
    body += csv_join({format_double(r.mu), format_double(r.cost), format_double(r.f_y),
                      format_double(r.rank_ratio), r.status});
  write_with_manifest(out_path, body,
                      make_manifest("pareto", a, {{"mu_grid", std::to_string(grid)}}));
  std::printf("pareto: %zu rows -> %s\n", rows.size(), out_path.c_str());
  for (const auto& r : rows)
    if (r.status.rfind("failed", 0) == 0) return 1;
  return 0;
}

int cmd_sweep_load(const CommonArgs& a, const std::string& factors_arg,
                   const std::string& out_path) {
  LoadedModels m = load_inputs(a);
  std::vector<double> factors = parse_list(factors_arg);
  auto rows = load_sweep(m.nominal, m.dyn, a.k, factors, a.tol, effective_jobs(a.jobs));
  std::string body = csv_join({"factor", "f_y_mu0", "f_y_mu1", "improvement_pct", "status"});
  for (const auto& r : rows)
    body += csv_join({format_double(r.factor), format_double(r.f_y_mu0),
                      format_double(r.f_y_mu1), format_double(r.improvement_pct), r.status});
  write_with_manifest(out_path, body,
                      make_manifest("sweep-load", a, {{"factors", factors_arg}}));
  std::printf("sweep-load: %zu rows -> %s\n", rows.size(), out_path.c_str());
  for (const auto& r : rows)
    if (r.status.rfind("failed", 0) == 0) return 1;
  return 0;
}

int cmd_freqresp(const CommonArgs& a, int modes, const std::string& grid,
                 const std::string& out_path) {
  LoadedModels m = load_inputs(a);
  InstanceConfig cfg;
  cfg.mu = 0.0;
  cfg.k = a.k;
  cfg.load_scale = a.load_scale;
  cfg.tol = a.tol;
  InstanceResult r = run_opf_instance(m.nominal, m.dyn, cfg);
  if (!r.solved()) {
    std::cerr << "freqresp: operating point solve failed (" << r.error << ")\n";
    return 1;
  }
  std::vector<double> omegas = grid.empty() ? std::vector<double>{} : parse_grid(grid);
  auto rows = freq_response_table(r.eigvals, r.gamma, modes, omegas);
  std::string body = csv_join({"mode_index", "lambda", "omega", "H2"});
  for (const auto& row : rows)
    body += csv_join({std::to_string(row.mode_index), format_double(row.lambda),
                      format_double(row.omega), format_double(row.h2)});
  write_with_manifest(out_path, body,
                      make_manifest("freqresp", a,
                                    {{"modes", std::to_string(modes)}, {"omega_grid", grid}}));
  std::printf("freqresp: %zu rows -> %s\n", rows.size(), out_path.c_str());
  return 0;
}

int cmd_validate(const CommonArgs& a, const SimConfig& sim) {
  LoadedModels m = load_inputs(a);
  InstanceConfig cfg;
  cfg.mu = 0.0;
  cfg.k = a.k;
  cfg.load_scale = a.load_scale;
  cfg.tol = a.tol;
  InstanceResult r = run_opf_instance(m.nominal, m.dyn, cfg);
  if (!r.solved()) {
    std::cerr << "validate: operating point solve failed (" << r.error << ")\n";
    return 1;
  }

  bool all_pass = true;
  auto line = [&](bool pass, const std::string& name, const std::string& detail) {
    std::printf("[%s] %s: %s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
    all_pass = all_pass && pass;
  };

  // per-mode variance checks over the selected band
  for (int i = 1; i <= a.k && i < r.eigvals.size(); ++i) {
    const double lam = r.eigvals[i];
    const double analytic = eigenstate_variance(lam, r.gamma);
    char buf[160];
    try {
      VarianceEstimate est = simulate_eigensystem(lam, r.gamma, sim);
      const double z = std::abs(est.value - analytic) / std::max(est.stderr_, 1e-300);
      std::snprintf(buf, sizeof(buf), "mode %d  mc %.5g  analytic %.5g  z = %.2f", i + 1,
                    est.value, analytic, z);
      line(z <= 3.0, "variance", buf);
    } catch (const std::exception& ex) {
      line(false, "variance", std::string("mode ") + std::to_string(i + 1) + ": " + ex.what());
    }
  }

  // Lemma-1 program on the solved operating point vs the eigenvalue sum
  try {
    RawCase scaled = scale_loads(m.nominal, a.load_scale);
    AdmittanceModel adm = build_ybus(scaled);
    KronModel kron = kron_reduce(adm, m.dyn, scaled.synchronous_buses());
    const int s_count = static_cast<int>(kron.sync_buses.size());
    VectorXcd v_sync(s_count);
    for (int i = 0; i < s_count; ++i)
      v_sync[i] = r.report.recovered_v[scaled.bus_index(kron.sync_buses[i])];
    OperatingPoint op = operating_point_from_voltages(v_sync, kron);
    LaplacianResult lap = laplacian_from_angles(op, kron);
    VectorXd inertias = inertia_vector(kron, m.dyn);
    SwingSpectrum sp = spectrum(lap.L, inertias);
    sp.band = select_band(sp, BandSpec::count(a.k));
    const double closed = stability_metric(sp, r.gamma);

    ConeProgram prog = make_lemma1_program(sp.L_M, inertias, a.k, r.gamma);
    SolverSettings st;
    st.tol = 1e-8;
    ConicSolution sol = solve(prog.standard_form(), st);
    const double rel = std::abs(sol.primal_obj - closed) / closed;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "sdp %.8g  eigensum %.8g  rel %.2e", sol.primal_obj,
                  closed, rel);
    line(sol.optimal() && rel <= 1e-6, "lemma1", buf);
  } catch (const std::exception& ex) {
    line(false, "lemma1", ex.what());
  }

  return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"inter-area oscillation aware optimal power flow"};
  app.require_subcommand(1);

  CommonArgs a;
  double mu = 0.0;
  int grid = 21;
  int modes = 10;
  std::string out_path;
  std::string factors = "0.5,0.6,0.7,0.8,0.9,1.0,1.1";
  std::string omega_grid = "0.05:15:300";
  SimConfig sim;

  CLI::App* opf = app.add_subcommand("opf", "solve one stability-aware OPF instance");
  add_common(opf, a);
  opf->add_option("--mu", mu, "trade-off weight in [0,1]");
  opf->add_option("--out", out_path, "report path")->default_val("opf_report.json");

  CLI::App* pareto = app.add_subcommand("pareto", "sweep mu over [0,1]");
  add_common(pareto, a);
  pareto->add_option("--mu-grid", grid, "number of grid points");
  pareto->add_option("--out", out_path, "CSV path")->default_val("pareto.csv");

  CLI::App* sweep = app.add_subcommand("sweep-load", "compare mu=0 and mu=1 over load factors");
  add_common(sweep, a);
  sweep->add_option("--factors", factors, "comma separated load factors");
  sweep->add_option("--out", out_path, "CSV path")->default_val("sweep_load.csv");

  CLI::App* freq = app.add_subcommand("freqresp", "eigensystem frequency responses");
  add_common(freq, a);
  freq->add_option("--modes", modes, "number of modes, starting at mode 2");
  freq->add_option("--omega-grid", omega_grid, "omega grid min:max:count");
  freq->add_option("--out", out_path, "CSV path")->default_val("freqresp.csv");

  CLI::App* val = app.add_subcommand("validate", "Monte Carlo checks of the analytic metric");
  add_common(val, a);
  val->add_option("--dt", sim.dt, "integration step (s)");
  val->add_option("--horizon", sim.horizon, "simulated horizon (s)");
  val->add_option("--burn-in", sim.burn_in, "discarded prefix (s)");
  val->add_option("--trials", sim.n_trials, "number of trials");
  val->add_option("--seed", sim.seed, "base RNG seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (opf->parsed()) return cmd_opf(a, mu, out_path);
    if (pareto->parsed()) return cmd_pareto(a, grid, out_path);
    if (sweep->parsed()) return cmd_sweep_load(a, factors, out_path);
    if (freq->parsed()) return cmd_freqresp(a, modes, omega_grid, out_path);
    if (val->parsed()) return cmd_validate(a, sim);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}
