#include "oscillopf/casefile.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace oscillopf {

namespace {

using json = nlohmann::json;

struct Line {
  int number;
  std::string text;
};

// Strip MATLAB comments and split into non-empty lines.
std::vector<Line> clean_lines(const std::string& text) {
  std::vector<Line> out;
  std::istringstream in(text);
  std::string raw;
  int number = 0;
  while (std::getline(in, raw)) {
    ++number;
    auto pct = raw.find('%');
    if (pct != std::string::npos) raw.erase(pct);
    size_t a = raw.find_first_not_of(" \t\r");
    if (a == std::string::npos) continue;
    size_t b = raw.find_last_not_of(" \t\r");
    out.push_back({number, raw.substr(a, b - a + 1)});
  }
  return out;
}

std::vector<double> parse_row(const std::string& s, int line_no) {
  std::string t = s;
  for (char& ch : t)
    if (ch == ';' || ch == ',') ch = ' ';
  std::istringstream in(t);
  std::vector<double> vals;
  std::string tok;
  while (in >> tok) {
    try {
      size_t pos = 0;
      vals.push_back(std::stod(tok, &pos));
      if (pos != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ParseError("expected a number, got '" + tok + "'", line_no);
    }
  }
  return vals;
}

BusType bus_type_from(double v, int line_no) {
  const int t = static_cast<int>(v);
  switch (t) {
    case 1: return BusType::PQ;
    case 2: return BusType::PV;
    case 3: return BusType::Ref;
    case 4: return BusType::Isolated;
    default: throw ParseError("invalid bus type " + std::to_string(t), line_no);
  }
}

}  // namespace

RawCase parse_matpower(const std::string& text) {
  const std::vector<Line> lines = clean_lines(text);
  if (lines.empty()) throw ParseError("empty case file", 1);

  RawCase c;
  bool saw_base = false, saw_bus = false, saw_branch = false, saw_gen = false;

  size_t i = 0;
  while (i < lines.size()) {
    const Line& ln = lines[i];
    auto eq = ln.text.find('=');
    if (ln.text.rfind("function", 0) == 0) {
      if (eq != std::string::npos) {
        // "function mpc = case39" style header
        size_t a = ln.text.find_first_not_of(" \t", eq + 1);
        if (a != std::string::npos) c.name = ln.text.substr(a);
      }
      ++i;
      continue;
    }
    if (eq == std::string::npos) {
      ++i;
      continue;
    }
    std::string key = ln.text.substr(0, eq);
    key.erase(key.find_last_not_of(" \t") + 1);

    if (key == "mpc.version") {
      ++i;
      continue;
    }
    if (key == "mpc.baseMVA") {
      std::string rhs = ln.text.substr(eq + 1);
      for (char& ch : rhs)
        if (ch == ';') ch = ' ';
      c.base_mva = parse_row(rhs, ln.number).at(0);
      if (!(c.base_mva > 0)) throw ParseError("baseMVA must be positive", ln.number);
      saw_base = true;
      ++i;
      continue;
    }

    const bool is_matrix = key == "mpc.bus" || key == "mpc.branch" || key == "mpc.gen" ||
                           key == "mpc.gencost";
    if (!is_matrix) {
      ++i;
      continue;
    }

    // Collect rows until the closing bracket.
    std::vector<std::vector<double>> rows;
    std::vector<int> row_lines;
    std::string tail = ln.text.substr(eq + 1);
    auto open = tail.find('[');
    if (open == std::string::npos) throw ParseError("expected '[' after " + key, ln.number);
    tail = tail.substr(open + 1);
    bool closed = false;
    int cur_line = ln.number;
    auto feed = [&](std::string chunk, int line_no) {
      auto close = chunk.find(']');
      if (close != std::string::npos) {
        chunk.erase(close);
        closed = true;
      }
      std::vector<double> vals = parse_row(chunk, line_no);
      if (!vals.empty()) {
        rows.push_back(vals);
        row_lines.push_back(line_no);
      }
    };
    feed(tail, cur_line);
    ++i;
    while (!closed) {
      if (i >= lines.size()) throw ParseError("unterminated matrix " + key, cur_line);
      cur_line = lines[i].number;
      feed(lines[i].text, cur_line);
      ++i;
    }

    if (key == "mpc.bus") {
      for (size_t r = 0; r < rows.size(); ++r) {
        const auto& v = rows[r];
        if (v.size() < 13) throw ParseError("bus row needs 13 columns", row_lines[r]);
        Bus b;
        b.id = static_cast<int>(v[0]);
        b.type = bus_type_from(v[1], row_lines[r]);
        b.p_load = v[2];
        b.q_load = v[3];
        b.shunt_g = v[4];
        b.shunt_b = v[5];
        b.v_max = v[11];
        b.v_min = v[12];
        c.buses.push_back(b);
      }
      saw_bus = true;
    } else if (key == "mpc.branch") {
      for (size_t r = 0; r < rows.size(); ++r) {
        const auto& v = rows[r];
        if (v.size() < 11) throw ParseError("branch row needs 11 columns", row_lines[r]);
        Branch br;
        br.from = static_cast<int>(v[0]);
        br.to = static_cast<int>(v[1]);
        br.r = v[2];
        br.x = v[3];
        br.b_charging = v[4];
        br.rate = v[5];
        br.status = v[10] != 0.0;
        c.branches.push_back(br);
      }
      saw_branch = true;
    } else if (key == "mpc.gen") {
      for (size_t r = 0; r < rows.size(); ++r) {
        const auto& v = rows[r];
        if (v.size() < 10) throw ParseError("gen row needs 10 columns", row_lines[r]);
        Generator g;
        g.bus = static_cast<int>(v[0]);
        g.q_max = v[3];
        g.q_min = v[4];
        g.status = v[7] > 0.0;
        g.p_max = v[8];
        g.p_min = v[9];
        c.gens.push_back(g);
      }
      saw_gen = true;
    }
    // mpc.gencost rows are intentionally dropped.
  }

  if (!saw_base) throw ParseError("missing mpc.baseMVA", 1);
  if (!saw_bus) throw ParseError("missing mpc.bus matrix", 1);
  if (!saw_branch) throw ParseError("missing mpc.branch matrix", 1);
  if (!saw_gen) throw ParseError("missing mpc.gen matrix", 1);

  // Uniform linear costs for every in-service generator bus.
  for (const Generator& g : c.gens)
    if (g.status) c.costs.push_back({g.bus, 1.0, 0.1});

  c.validate();
  return c;
}

DynamicParams load_dynamics(const std::string& text, const RawCase& c,
                            bool strict_assumption) {
  DynamicParams d;
  bool have_gamma = false;

  const std::vector<int> sync = c.synchronous_buses();
  auto is_sync = [&](int bus) {
    return std::find(sync.begin(), sync.end(), bus) != sync.end();
  };

  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    std::istringstream ls(raw);
    std::string kind;
    if (!(ls >> kind)) continue;

    if (kind == "gamma") {
      double v;
      if (!(ls >> v)) throw ParseError("gamma needs a value", line_no);
      if (!(v > 0)) throw ParseError("gamma must be positive", line_no);
      d.gamma = v;
      have_gamma = true;
      continue;
    }
    if (kind != "inertia" && kind != "damping" && kind != "xint")
      throw ParseError("unknown record '" + kind + "'", line_no);

    int bus;
    double value;
    if (!(ls >> bus >> value)) throw ParseError(kind + " needs <bus> <value>", line_no);
    if (!(value > 0)) throw ParseError(kind + " must be positive", line_no);
    c.bus_index(bus);
    if (!is_sync(bus))
      throw ParseError(kind + " given for zero-injection bus " + std::to_string(bus), line_no);

    auto& dest = kind == "inertia" ? d.inertia : kind == "damping" ? d.damping
                                                                   : d.internal_reactance;
    dest[bus] = value;
  }

  // Generator buses anchor the defaults.
  std::vector<int> gen_buses;
  for (int b : sync)
    if (c.has_generator(b)) gen_buses.push_back(b);

  auto mean_over_gens = [&](const std::map<int, double>& m, const char* what) {
    double sum = 0;
    for (int b : gen_buses) {
      auto it = m.find(b);
      if (it == m.end())
        throw Error(std::string("sidecar is missing ") + what + " for generator bus " +
                    std::to_string(b));
      sum += it->second;
    }
    return sum / static_cast<double>(gen_buses.size());
  };

  if (gen_buses.empty()) throw Error("case has no in-service generators");
  const double mean_m = mean_over_gens(d.inertia, "inertia");
  const double mean_x = mean_over_gens(d.internal_reactance, "xint");
  for (int b : sync) {
    if (!d.inertia.count(b)) d.inertia[b] = 0.10 * mean_m;
    if (!d.internal_reactance.count(b)) d.internal_reactance[b] = 0.10 * mean_x;
  }

  if (!have_gamma) {
    if (d.damping.empty())
      throw Error("sidecar specifies neither gamma nor any damping");
    double sum_d = 0, sum_m = 0;
    for (const auto& [bus, dn] : d.damping) {
      sum_d += dn;
      sum_m += d.inertia_at(bus);
    }
    d.gamma = sum_d / sum_m;
  }

  if (strict_assumption) {
    for (const auto& [bus, dn] : d.damping) {
      const double expect = d.gamma * d.inertia_at(bus);
      if (std::abs(dn - expect) > 1e-9 * std::max(1.0, std::abs(expect)))
        throw Error("damping at bus " + std::to_string(bus) +
                    " violates D = gamma * M");
    }
  }
  for (int b : sync)
    if (!d.damping.count(b)) d.damping[b] = d.gamma * d.inertia_at(b);

  return d;
}

std::string case_to_json(const RawCase& c) {
  json j;
  j["schema_version"] = 1;
  j["name"] = c.name;
  j["base_mva"] = c.base_mva;
  for (const Bus& b : c.buses)
    j["buses"].push_back({{"id", b.id},
                          {"type", static_cast<int>(b.type)},
                          {"p_load_mw", b.p_load},
                          {"q_load_mvar", b.q_load},
                          {"shunt_g_mw", b.shunt_g},
                          {"shunt_b_mvar", b.shunt_b},
                          {"v_min_pu", b.v_min},
                          {"v_max_pu", b.v_max}});
  for (const Branch& br : c.branches)
    j["branches"].push_back({{"from", br.from},
                             {"to", br.to},
                             {"r_pu", br.r},
                             {"x_pu", br.x},
                             {"b_charging_pu", br.b_charging},
                             {"rate_mva", br.rate},
                             {"status", br.status}});
  for (const Generator& g : c.gens)
    j["gens"].push_back({{"bus", g.bus},
                         {"p_min_mw", g.p_min},
                         {"p_max_mw", g.p_max},
                         {"q_min_mvar", g.q_min},
                         {"q_max_mvar", g.q_max},
                         {"status", g.status}});
  for (const GenCost& gc : c.costs)
    j["costs"].push_back({{"bus", gc.bus}, {"c_p", gc.c_p}, {"c_q", gc.c_q}});
  return j.dump(2);
}

RawCase case_from_json(const std::string& text) {
  json j = json::parse(text);
  RawCase c;
  c.name = j.value("name", "");
  c.base_mva = j.at("base_mva").get<double>();
  for (const auto& jb : j.value("buses", json::array())) {
    Bus b;
    b.id = jb.at("id");
    b.type = static_cast<BusType>(jb.at("type").get<int>());
    b.p_load = jb.at("p_load_mw");
    b.q_load = jb.at("q_load_mvar");
    b.shunt_g = jb.at("shunt_g_mw");
    b.shunt_b = jb.at("shunt_b_mvar");
    b.v_min = jb.at("v_min_pu");
    b.v_max = jb.at("v_max_pu");
    c.buses.push_back(b);
  }
  for (const auto& jb : j.value("branches", json::array())) {
    Branch br;
    br.from = jb.at("from");
    br.to = jb.at("to");
    br.r = jb.at("r_pu");
    br.x = jb.at("x_pu");
    br.b_charging = jb.at("b_charging_pu");
    br.rate = jb.at("rate_mva");
    br.status = jb.at("status");
    c.branches.push_back(br);
  }
  for (const auto& jg : j.value("gens", json::array())) {
    Generator g;
    g.bus = jg.at("bus");
    g.p_min = jg.at("p_min_mw");
    g.p_max = jg.at("p_max_mw");
    g.q_min = jg.at("q_min_mvar");
    g.q_max = jg.at("q_max_mvar");
    g.status = jg.at("status");
    c.gens.push_back(g);
  }
  for (const auto& jc : j.value("costs", json::array()))
    c.costs.push_back({jc.at("bus"), jc.at("c_p"), jc.at("c_q")});
  c.validate();
  return c;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << content;
}

}  // namespace oscillopf
