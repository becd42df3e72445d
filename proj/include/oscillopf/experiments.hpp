#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "oscillopf/ambient_sim.hpp"
#include "oscillopf/conic_solver.hpp"
#include "oscillopf/recovery.hpp"
#include "oscillopf/sdp_builder.hpp"

namespace oscillopf {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

struct InstanceConfig {
  double mu = 0.0;
  int k = 3;
  double load_scale = 1.0;
  double tol = 1e-8;
  int max_iter = 200;
  double exactness_threshold = 1e-3;
};

/// One solved stability-aware OPF instance plus recovery diagnostics.
struct InstanceResult {
  SolveStatus status = SolveStatus::NumericalError;
  bool exact = false;
  double rank_ratio_V = 0.0;
  double rank_ratio_E = 0.0;
  double objective = 0.0;
  double cost_sdp = 0.0;       // cost term from the lifted dispatch
  double stability_sdp = 0.0;  // (trace Z + K s)/(2 gamma) at the solution
  double f_y_from_E = 0.0;     // closed form on L mapped from the lifted E
  ExactnessReport report;
  VectorXd eigvals;  // spectrum at the recovered operating point
  double gamma = 0.0;
  int iterations = 0;
  double solve_time = 0.0;
  double gap = 0.0;
  std::string error;

  bool solved() const { return status == SolveStatus::Optimal; }
};

InstanceResult run_opf_instance(const RawCase& nominal, const DynamicParams& dyn,
                                const InstanceConfig& cfg);

struct ParetoRow {
  double mu = 0.0;
  double cost = 0.0;
  double f_y = 0.0;
  double rank_ratio = 0.0;
  std::string status;
};

std::vector<ParetoRow> pareto_sweep(const RawCase& nominal, const DynamicParams& dyn,
                                    int k, double load_scale, int grid_size, double tol,
                                    int jobs);

struct LoadSweepRow {
  double factor = 0.0;
  double f_y_mu0 = 0.0;
  double f_y_mu1 = 0.0;
  double improvement_pct = 0.0;
  std::string status;
};

std::vector<LoadSweepRow> load_sweep(const RawCase& nominal, const DynamicParams& dyn,
                                     int k, const std::vector<double>& factors, double tol,
                                     int jobs);

struct FreqRespRow {
  int mode_index = 0;  // 1-based, mode 1 is the excluded zero mode
  double lambda = 0.0;
  double omega = 0.0;
  double h2 = 0.0;
};

std::vector<FreqRespRow> freq_response_table(const VectorXd& eigvals, double gamma,
                                             int n_modes, const std::vector<double>& omegas);

struct RunManifest {
  std::string command;
  std::string case_path;
  std::string dynamics_path;
  std::map<std::string, std::string> config;
  std::string tool_version = kToolVersion;
  std::string timestamp;
  std::vector<std::string> outputs;

  std::string to_json() const;
};

std::string iso_timestamp();
int effective_jobs(int requested);  // applies the OSCILLOPF_JOBS override

/// CSV assembly: comma separated, '.' decimal, LF endings, header first.
std::string csv_join(const std::vector<std::string>& fields);
std::string format_double(double v);

}  // namespace oscillopf
