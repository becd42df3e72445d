#include "oscillopf/case.hpp"

#include <algorithm>
#include <functional>
#include <set>

namespace oscillopf {

int RawCase::bus_index(int bus_id) const {
  for (size_t i = 0; i < buses.size(); ++i)
    if (buses[i].id == bus_id) return static_cast<int>(i);
  throw Error("unknown bus id " + std::to_string(bus_id));
}

bool RawCase::has_generator(int bus_id) const {
  return std::any_of(gens.begin(), gens.end(),
                     [&](const Generator& g) { return g.status && g.bus == bus_id; });
}

bool RawCase::is_synchronous(int bus_id) const {
  const Bus& b = buses[bus_index(bus_id)];
  return has_generator(bus_id) || b.p_load != 0.0 || b.q_load != 0.0;
}

std::vector<int> RawCase::synchronous_buses() const {
  std::vector<int> out;
  for (const Bus& b : buses)
    if (is_synchronous(b.id)) out.push_back(b.id);
  return out;
}

std::vector<int> RawCase::zero_injection_buses() const {
  std::vector<int> out;
  for (const Bus& b : buses)
    if (!is_synchronous(b.id)) out.push_back(b.id);
  return out;
}

void RawCase::validate() const {
  if (buses.empty()) throw Error("case has no buses");

  std::set<int> ids;
  int n_ref = 0;
  for (const Bus& b : buses) {
    if (!ids.insert(b.id).second)
      throw Error("duplicate bus id " + std::to_string(b.id));
    if (b.type == BusType::Ref) ++n_ref;
    if (b.v_min > b.v_max)
      throw Error("bus " + std::to_string(b.id) + ": v_min > v_max");
  }
  if (n_ref != 1)
    throw Error("expected exactly one reference bus, found " + std::to_string(n_ref));

  for (const Branch& br : branches) {
    if (!ids.count(br.from) || !ids.count(br.to))
      throw Error("branch " + std::to_string(br.from) + "-" + std::to_string(br.to) +
                  " references unknown bus");
  }
  for (const Generator& g : gens) {
    if (!ids.count(g.bus)) throw Error("generator at unknown bus " + std::to_string(g.bus));
    if (g.p_min > g.p_max || g.q_min > g.q_max)
      throw Error("generator at bus " + std::to_string(g.bus) + ": inverted limits");
  }

  // Connectivity over in-service branches.
  std::map<int, int> comp;
  for (const Bus& b : buses) comp[b.id] = b.id;
  std::function<int(int)> find = [&](int v) {
    while (comp[v] != v) v = comp[v] = comp[comp[v]];
    return v;
  };
  for (const Branch& br : branches)
    if (br.status) comp[find(br.from)] = find(br.to);
  const int root = find(buses.front().id);
  for (const Bus& b : buses)
    if (find(b.id) != root) throw Error("network is disconnected at bus " + std::to_string(b.id));
}

double DynamicParams::inertia_at(int bus_id) const {
  auto it = inertia.find(bus_id);
  if (it == inertia.end()) throw Error("no inertia for bus " + std::to_string(bus_id));
  return it->second;
}

double DynamicParams::damping_at(int bus_id) const {
  auto it = damping.find(bus_id);
  if (it == damping.end()) throw Error("no damping for bus " + std::to_string(bus_id));
  return it->second;
}

double DynamicParams::reactance_at(int bus_id) const {
  auto it = internal_reactance.find(bus_id);
  if (it == internal_reactance.end())
    throw Error("no internal reactance for bus " + std::to_string(bus_id));
  return it->second;
}

RawCase scale_loads(const RawCase& c, double factor) {
  if (!(factor > 0.0)) throw Error("load scale factor must be positive");
  RawCase out = c;
  for (Bus& b : out.buses) {
    b.p_load *= factor;
    b.q_load *= factor;
  }
  return out;
}

}  // namespace oscillopf
