#include "oscillopf/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <future>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace oscillopf {

InstanceResult run_opf_instance(const RawCase& nominal, const DynamicParams& dyn,
                                const InstanceConfig& cfg) {
  InstanceResult res;
  try {
    RawCase scaled = scale_loads(nominal, cfg.load_scale);
    AdmittanceModel adm = build_ybus(scaled);
    KronModel kron = kron_reduce(adm, dyn, scaled.synchronous_buses());
    QuadraticForms forms = quadratic_forms(adm, scaled);

    TradeoffConfig tc;
    tc.mu = cfg.mu;
    tc.band = BandSpec::count(cfg.k);
    tc.gamma = dyn.gamma;
    OpfModel model = build_opf_sdp(scaled, kron, forms, dyn, tc);
    res.gamma = model.gamma;

    StandardForm sf = model.prog.standard_form();
    SolverSettings st;
    st.tol = cfg.tol;
    st.max_iter = cfg.max_iter;
    ConicSolution sol = solve(sf, st);
    res.status = sol.status;
    res.iterations = sol.iterations;
    res.solve_time = sol.solve_time;
    res.gap = sol.gap;
    res.objective = sol.primal_obj;
    if (!sol.optimal()) {
      res.error = "solver returned " + status_name(sol.status);
      return res;
    }

    MatrixXcd V = complexify(model.prog.sym_value("V_real", sol.primal));
    MatrixXcd E = complexify(model.prog.sym_value("E_real", sol.primal));
    VectorXd p_g = model.prog.vector_value("p_g", sol.primal);
    VectorXd q_g = model.prog.vector_value("q_g", sol.primal);
    MatrixXd Z = model.prog.sym_value("Z", sol.primal);
    const double s_val = model.prog.scalar_value("s", sol.primal);

    res.rank_ratio_V = rank1_ratio(V);
    res.rank_ratio_E = rank1_ratio(E);
    res.exact = res.rank_ratio_V < cfg.exactness_threshold;
    res.stability_sdp = (Z.trace() + model.band_k * s_val) / (2.0 * model.gamma);

    std::map<int, std::pair<double, double>> cost_of;
    for (const GenCost& gc : scaled.costs) cost_of[gc.bus] = {gc.c_p, gc.c_q};
    double cost = 0;
    for (size_t a = 0; a < model.sync_buses.size(); ++a) {
      auto it = cost_of.find(model.sync_buses[a]);
      if (it == cost_of.end()) continue;
      cost += it->second.first * p_g[static_cast<int>(a)] +
              it->second.second * q_g[static_cast<int>(a)];
    }
    res.cost_sdp = cost;

    int ref_pos = 0;
    for (size_t i = 0; i < scaled.buses.size(); ++i)
      if (scaled.buses[i].type == BusType::Ref) ref_pos = static_cast<int>(i);
    VectorXcd v = rank1_factor(V, ref_pos);

    const int s_count = static_cast<int>(kron.sync_buses.size());
    VectorXcd v_sync(s_count);
    for (int a = 0; a < s_count; ++a)
      v_sync[a] = v[scaled.bus_index(kron.sync_buses[a])];
    OperatingPoint op = operating_point_from_voltages(v_sync, kron);
    VectorXcd e = op.phasors();

    res.report = verify_dispatch(v, e, scaled, adm, kron, dyn, model.gamma, tc.band, p_g, q_g);
    res.report.rank_ratio_V = res.rank_ratio_V;
    res.report.rank_ratio_E = res.rank_ratio_E;

    VectorXd inertias = inertia_vector(kron, dyn);
    {
      SwingSpectrum sp = spectrum(laplacian_from_lifted(E, kron), inertias);
      sp.band = select_band(sp, tc.band);
      res.f_y_from_E = stability_metric(sp, model.gamma);
    }
    {
      LaplacianResult lap = laplacian_from_angles(op, kron);
      SwingSpectrum sp = spectrum(lap.L, inertias);
      res.eigvals = sp.eigvals;
    }
  } catch (const std::exception& ex) {
    if (res.error.empty()) res.error = ex.what();
    if (res.status == SolveStatus::Optimal) res.status = SolveStatus::NumericalError;
  }
  return res;
}

namespace {

// Run `fn(i)` for i in [0, count) on up to `jobs` threads, results in order.
template <typename T, typename Fn>
std::vector<T> parallel_map(int count, int jobs, Fn fn) {
  std::vector<T> out(count);
  if (jobs <= 1) {
    for (int i = 0; i < count; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= count) return;
      out[i] = fn(i);
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < std::min(jobs, count); ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  return out;
}

}  // namespace

std::vector<ParetoRow> pareto_sweep(const RawCase& nominal, const DynamicParams& dyn,
                                    int k, double load_scale, int grid_size, double tol,
                                    int jobs) {
  if (grid_size < 2) throw Error("pareto grid needs at least 2 points");
  std::vector<double> mus(grid_size);
  for (int i = 0; i < grid_size; ++i)
    mus[i] = static_cast<double>(i) / static_cast<double>(grid_size - 1);

  return parallel_map<ParetoRow>(grid_size, jobs, [&](int i) {
    InstanceConfig cfg;
    cfg.mu = mus[i];
    cfg.k = k;
    cfg.load_scale = load_scale;
    cfg.tol = tol;
    InstanceResult r = run_opf_instance(nominal, dyn, cfg);
    ParetoRow row;
    row.mu = mus[i];
    if (r.solved()) {
      row.cost = r.cost_sdp;
      row.f_y = r.report.f_y_recovered;
      row.rank_ratio = r.rank_ratio_V;
      row.status = r.exact ? "exact" : "inexact";
    } else {
      row.status = "failed:" + (r.error.empty() ? status_name(r.status) : r.error);
    }
    return row;
  });
}

std::vector<LoadSweepRow> load_sweep(const RawCase& nominal, const DynamicParams& dyn,
                                     int k, const std::vector<double>& factors, double tol,
                                     int jobs) {
  for (double f : factors)
    if (!(f > 0)) throw Error("load factors must be positive");

  struct Point {
    double factor;
    double mu;
  };
  std::vector<Point> pts;
  for (double f : factors) {
    pts.push_back({f, 0.0});
    pts.push_back({f, 1.0});
  }
  auto results = parallel_map<InstanceResult>(static_cast<int>(pts.size()), jobs, [&](int i) {
    InstanceConfig cfg;
    cfg.mu = pts[i].mu;
    cfg.k = k;
    cfg.load_scale = pts[i].factor;
    cfg.tol = tol;
    return run_opf_instance(nominal, dyn, cfg);
  });

  std::vector<LoadSweepRow> rows;
  for (size_t i = 0; i < factors.size(); ++i) {
    const InstanceResult& r0 = results[2 * i];
    const InstanceResult& r1 = results[2 * i + 1];
    LoadSweepRow row;
    row.factor = factors[i];
    if (r0.solved() && r1.solved()) {
      row.f_y_mu0 = r0.report.f_y_recovered;
      row.f_y_mu1 = r1.report.f_y_recovered;
      row.improvement_pct = 100.0 * (row.f_y_mu0 - row.f_y_mu1) / row.f_y_mu0;
      row.status = (r0.exact && r1.exact) ? "exact" : "inexact";
    } else {
      row.status = "failed:" + (r0.solved() ? r1.error : r0.error);
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<FreqRespRow> freq_response_table(const VectorXd& eigvals, double gamma,
                                             int n_modes, const std::vector<double>& omegas) {
  std::vector<FreqRespRow> rows;
  const int s = static_cast<int>(eigvals.size());
  for (int m = 0; m < n_modes && m + 1 < s; ++m) {
    const double lam = eigvals[m + 1];
    for (double w : omegas)
      rows.push_back({m + 2, lam, w, freq_response_sq(lam, gamma, w)});
  }
  return rows;
}

std::string iso_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tmv{};
  gmtime_r(&t, &tmv);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tmv);
  return buf;
}

int effective_jobs(int requested) {
  if (const char* env = std::getenv("OSCILLOPF_JOBS")) {
    const int j = std::atoi(env);
    if (j >= 1) return j;
  }
  if (requested >= 1) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

std::string RunManifest::to_json() const {
  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = command;
  j["case_path"] = case_path;
  j["dynamics_path"] = dynamics_path;
  j["config"] = config;
  j["tool_version"] = tool_version;
  j["timestamp"] = timestamp;
  j["outputs"] = outputs;
  return j.dump(2);
}

std::string csv_join(const std::vector<std::string>& fields) {
  std::string out;
  for (size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ",";
    out += fields[i];
  }
  out += "\n";
  return out;
}

std::string format_double(double v) {
  std::ostringstream ss;
  ss.precision(12);
  ss << v;
  return ss.str();
}

}  // namespace oscillopf
