#pragma once

#include <random>
#include <string>

#include "oscillopf/case.hpp"
#include "oscillopf/casefile.hpp"

namespace fixtures {

// Three synchronous buses (two generators, one load), no zero-injection buses.
inline const char* kCase3 = R"(function mpc = case3
mpc.version = '2';
mpc.baseMVA = 100;
mpc.bus = [
	1	3	0	0	0	0	1	1.0	0	345	1	1.05	0.95;
	2	2	0	0	0	0	1	1.0	0	345	1	1.05	0.95;
	3	1	90	30	0	0	1	1.0	0	345	1	1.05	0.95;
];
mpc.gen = [
	1	0	0	100	-100	1.0	100	1	200	0;
	2	0	0	100	-100	1.0	100	1	150	0;
];
mpc.branch = [
	1	2	0.01	0.1	0.02	250	250	250	0	0	1	-360	360;
	1	3	0.01	0.08	0.02	250	250	250	0	0	1	-360	360;
	2	3	0.005	0.05	0.01	250	250	250	0	0	1	-360	360;
];
)";

inline const char* kDyn3 = R"(# three-bus sidecar
gamma 0.2
inertia 1 2.0
inertia 2 1.0
xint 1 0.1
xint 2 0.15
xint 3 0.2
)";

// Five buses with two zero-injection buses (4 and 5).
inline const char* kCase5 = R"(function mpc = case5
mpc.version = '2';
mpc.baseMVA = 100;
mpc.bus = [
	1	3	0	0	0	0	1	1.0	0	345	1	1.06	0.94;
	2	2	0	0	0	0	1	1.0	0	345	1	1.06	0.94;
	3	1	120	40	0	0	1	1.0	0	345	1	1.06	0.94;
	4	1	0	0	0	0	1	1.0	0	345	1	1.06	0.94;
	5	1	0	0	0	0	1	1.0	0	345	1	1.06	0.94;
];
mpc.gen = [
	1	0	0	150	-150	1.0	100	1	250	0;
	2	0	0	150	-150	1.0	100	1	200	0;
];
mpc.branch = [
	1	4	0.004	0.05	0.05	300	300	300	0	0	1	-360	360;
	4	2	0.004	0.06	0.05	300	300	300	0	0	1	-360	360;
	4	5	0.006	0.07	0.04	300	300	300	0	0	1	-360	360;
	5	3	0.005	0.06	0.03	300	300	300	0	0	1	-360	360;
	1	5	0.008	0.09	0.04	300	300	300	0	0	1	-360	360;
];
)";

inline const char* kDyn5 = R"(gamma 0.25
inertia 1 1.5
inertia 2 1.0
xint 1 0.12
xint 2 0.15
xint 3 0.25
)";

inline oscillopf::RawCase case3() { return oscillopf::parse_matpower(kCase3); }
inline oscillopf::RawCase case5() { return oscillopf::parse_matpower(kCase5); }
inline oscillopf::DynamicParams dyn3() {
  auto c = case3();
  return oscillopf::load_dynamics(kDyn3, c);
}
inline oscillopf::DynamicParams dyn5() {
  auto c = case5();
  return oscillopf::load_dynamics(kDyn5, c);
}

inline std::string data_path(const std::string& name) {
  return std::string(OSCILLOPF_DATA_DIR) + "/" + name;
}
inline oscillopf::RawCase ieee39() {
  return oscillopf::parse_matpower(oscillopf::read_file(data_path("ieee39.m")));
}
inline oscillopf::DynamicParams ieee39_dyn(const oscillopf::RawCase& c) {
  return oscillopf::load_dynamics(oscillopf::read_file(data_path("ieee39_dyn.txt")), c);
}

// Random connected network with all-synchronous buses, for property tests.
inline oscillopf::RawCase random_network(std::mt19937_64& rng, int n_buses) {
  using namespace oscillopf;
  std::uniform_real_distribution<double> ur(0.0, 1.0);
  RawCase c;
  c.name = "random";
  c.base_mva = 100.0;
  for (int i = 0; i < n_buses; ++i) {
    Bus b;
    b.id = i + 1;
    b.type = i == 0 ? BusType::Ref : BusType::PQ;
    b.p_load = 20.0 + 60.0 * ur(rng);
    b.q_load = 5.0 + 20.0 * ur(rng);
    b.v_min = 0.9;
    b.v_max = 1.1;
    c.buses.push_back(b);
  }
  Generator g;
  g.bus = 1;
  g.p_min = 0;
  g.p_max = 10000;
  g.q_min = -10000;
  g.q_max = 10000;
  c.gens.push_back(g);
  c.costs.push_back({1, 1.0, 0.1});
  auto add_branch = [&](int from, int to) {
    Branch br;
    br.from = from;
    br.to = to;
    br.r = 0.002 + 0.01 * ur(rng);
    br.x = 0.02 + 0.15 * ur(rng);
    br.b_charging = 0.1 * ur(rng);
    br.rate = 0;
    c.branches.push_back(br);
  };
  for (int i = 2; i <= n_buses; ++i) {
    std::uniform_int_distribution<int> pick(1, i - 1);
    add_branch(pick(rng), i);
  }
  const int extra = n_buses / 2;
  for (int k = 0; k < extra; ++k) {
    std::uniform_int_distribution<int> pick(1, n_buses);
    int a = pick(rng), b = pick(rng);
    if (a != b) add_branch(a, b);
  }
  c.validate();
  return c;
}

}  // namespace fixtures
