#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace oscillopf {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Parse failure with the 1-based line number of the offending input line.
struct ParseError : Error {
  ParseError(const std::string& msg, int line_arg)
      : Error(msg + " (line " + std::to_string(line_arg) + ")"), line(line_arg) {}
  int line;
};

enum class BusType { PQ = 1, PV = 2, Ref = 3, Isolated = 4 };

struct Bus {
  int id = 0;
  BusType type = BusType::PQ;
  double p_load = 0.0;   // MW
  double q_load = 0.0;   // MVAr
  double shunt_g = 0.0;  // MW at 1 pu voltage
  double shunt_b = 0.0;  // MVAr at 1 pu voltage
  double v_min = 0.9;    // pu
  double v_max = 1.1;    // pu
};

struct Branch {
  int from = 0;
  int to = 0;
  double r = 0.0;           // pu
  double x = 0.0;           // pu
  double b_charging = 0.0;  // pu, total line charging
  double rate = 0.0;        // MVA, 0 = unlimited
  bool status = true;
};

struct Generator {
  int bus = 0;
  double p_min = 0.0;  // MW
  double p_max = 0.0;  // MW
  double q_min = 0.0;  // MVAr
  double q_max = 0.0;  // MVAr
  bool status = true;
};

struct GenCost {
  int bus = 0;
  double c_p = 1.0;  // $ per pu active generation
  double c_q = 0.1;  // $ per pu reactive generation
};

/// Static grid description in the units of the source case file.
struct RawCase {
  std::string name;
  double base_mva = 100.0;
  std::vector<Bus> buses;
  std::vector<Branch> branches;
  std::vector<Generator> gens;
  std::vector<GenCost> costs;

  int bus_index(int bus_id) const;  // position in `buses`, throws if unknown
  bool has_generator(int bus_id) const;

  /// A bus is synchronous iff it hosts an in-service generator or nonzero load.
  bool is_synchronous(int bus_id) const;
  std::vector<int> synchronous_buses() const;    // ids, in case order
  std::vector<int> zero_injection_buses() const; // ids, in case order

  void validate() const;  // throws Error on invariant violations
};

/// Per synchronous bus machine constants plus the uniform damping ratio.
struct DynamicParams {
  std::map<int, double> inertia;             // bus id -> M_n, s*pu
  std::map<int, double> damping;             // bus id -> D_n, pu
  std::map<int, double> internal_reactance;  // bus id -> x_n, pu
  double gamma = 0.0;                        // 1/s

  double inertia_at(int bus_id) const;
  double damping_at(int bus_id) const;
  double reactance_at(int bus_id) const;
};

/// Multiply every load by `factor`; everything else unchanged.
RawCase scale_loads(const RawCase& c, double factor);

}  // namespace oscillopf
