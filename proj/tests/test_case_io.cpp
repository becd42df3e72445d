#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "oscillopf/casefile.hpp"

using namespace oscillopf;

TEST_CASE("ieee39 parses with the expected structure") {
  RawCase c = fixtures::ieee39();
  CHECK(c.buses.size() == 39);
  CHECK(c.gens.size() == 10);
  CHECK(c.branches.size() == 46);
  CHECK(c.base_mva == doctest::Approx(100.0));
  CHECK(c.zero_injection_buses().size() == 10);
  CHECK(c.synchronous_buses().size() == 29);
  // classification partitions the bus set
  CHECK(c.synchronous_buses().size() + c.zero_injection_buses().size() == c.buses.size());
  // uniform linear costs attached to every generator bus
  CHECK(c.costs.size() == 10);
  for (const GenCost& gc : c.costs) {
    CHECK(gc.c_p == doctest::Approx(1.0));
    CHECK(gc.c_q == doctest::Approx(0.1));
  }
}

TEST_CASE("degenerate inputs raise parse errors") {
  CHECK_THROWS_AS(parse_matpower(""), ParseError);
  CHECK_THROWS_AS(parse_matpower("mpc.baseMVA = 100;\n"), ParseError);
  CHECK_THROWS_WITH_AS(
      parse_matpower("mpc.baseMVA = 100;\nmpc.bus = [\n  1 3 0 0 0 0 1 1 0 345 1 1.1 0.9;\n  banana;\n];\n"),
      doctest::Contains("line 4"), ParseError);
}

TEST_CASE("validation catches broken cases") {
  RawCase c = fixtures::case3();
  SUBCASE("duplicate bus id") {
    c.buses[1].id = 1;
    CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("duplicate"), Error);
  }
  SUBCASE("no reference bus") {
    c.buses[0].type = BusType::PQ;
    CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("reference"), Error);
  }
  SUBCASE("disconnected network") {
    c.branches[1].status = false;
    c.branches[2].status = false;
    CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("disconnected"), Error);
  }
  SUBCASE("inverted generator limits") {
    c.gens[0].p_min = 10;
    c.gens[0].p_max = 5;
    CHECK_THROWS_AS(c.validate(), Error);
  }
}

TEST_CASE("json round trip preserves every field") {
  RawCase c = fixtures::case3();
  RawCase rt = case_from_json(case_to_json(c));
  RawCase rt2 = case_from_json(case_to_json(rt));
  REQUIRE(rt.buses.size() == c.buses.size());
  for (size_t i = 0; i < c.buses.size(); ++i) {
    CHECK(rt.buses[i].id == c.buses[i].id);
    CHECK(rt.buses[i].type == c.buses[i].type);
    CHECK(rt.buses[i].p_load == c.buses[i].p_load);
    CHECK(rt.buses[i].q_load == c.buses[i].q_load);
    CHECK(rt.buses[i].shunt_g == c.buses[i].shunt_g);
    CHECK(rt.buses[i].shunt_b == c.buses[i].shunt_b);
    CHECK(rt.buses[i].v_min == c.buses[i].v_min);
    CHECK(rt.buses[i].v_max == c.buses[i].v_max);
  }
  REQUIRE(rt.branches.size() == c.branches.size());
  for (size_t i = 0; i < c.branches.size(); ++i) {
    CHECK(rt.branches[i].from == c.branches[i].from);
    CHECK(rt.branches[i].to == c.branches[i].to);
    CHECK(rt.branches[i].r == c.branches[i].r);
    CHECK(rt.branches[i].x == c.branches[i].x);
    CHECK(rt.branches[i].b_charging == c.branches[i].b_charging);
    CHECK(rt.branches[i].rate == c.branches[i].rate);
    CHECK(rt.branches[i].status == c.branches[i].status);
  }
  REQUIRE(rt.gens.size() == c.gens.size());
  for (size_t i = 0; i < c.gens.size(); ++i) {
    CHECK(rt.gens[i].bus == c.gens[i].bus);
    CHECK(rt.gens[i].p_min == c.gens[i].p_min);
    CHECK(rt.gens[i].p_max == c.gens[i].p_max);
    CHECK(rt.gens[i].q_min == c.gens[i].q_min);
    CHECK(rt.gens[i].q_max == c.gens[i].q_max);
  }
  // serialize(parse(serialize(x))) is byte-stable
  CHECK(case_to_json(rt) == case_to_json(rt2));
}

TEST_CASE("scale_loads") {
  RawCase c = fixtures::case3();
  SUBCASE("factor one is the identity") {
    RawCase s = scale_loads(c, 1.0);
    CHECK(s.buses[2].p_load == c.buses[2].p_load);
    CHECK(s.buses[2].q_load == c.buses[2].q_load);
  }
  SUBCASE("halving") {
    RawCase s = scale_loads(c, 0.5);
    CHECK(s.buses[2].p_load == doctest::Approx(45.0));
    CHECK(s.buses[2].q_load == doctest::Approx(15.0));
    CHECK(s.gens[0].p_max == c.gens[0].p_max);
    CHECK(s.branches[0].x == c.branches[0].x);
  }
  SUBCASE("composition") {
    RawCase ab = scale_loads(scale_loads(c, 0.7), 1.3);
    RawCase once = scale_loads(c, 0.7 * 1.3);
    for (size_t i = 0; i < c.buses.size(); ++i) {
      CHECK(ab.buses[i].p_load == doctest::Approx(once.buses[i].p_load).epsilon(1e-12));
      CHECK(ab.buses[i].q_load == doctest::Approx(once.buses[i].q_load).epsilon(1e-12));
    }
  }
  SUBCASE("total load scales") {
    RawCase nine = fixtures::ieee39();
    double total = 0, scaled_total = 0;
    RawCase s = scale_loads(nine, 1.1);
    for (size_t i = 0; i < nine.buses.size(); ++i) {
      total += nine.buses[i].p_load;
      scaled_total += s.buses[i].p_load;
    }
    CHECK(scaled_total == doctest::Approx(1.1 * total).epsilon(1e-12));
  }
  SUBCASE("nonpositive factor rejected") {
    CHECK_THROWS_AS(scale_loads(c, 0.0), Error);
    CHECK_THROWS_AS(scale_loads(c, -1.0), Error);
  }
}

TEST_CASE("dynamics sidecar defaults") {
  RawCase c = fixtures::ieee39();

  SUBCASE("ten percent of mean generator inertia") {
    std::string text = "gamma 0.1467\n";
    for (const Generator& g : c.gens) {
      text += "inertia " + std::to_string(g.bus) + " 5.0\n";
      text += "xint " + std::to_string(g.bus) + " 0.05\n";
    }
    DynamicParams d = load_dynamics(text, c);
    CHECK(d.inertia_at(12) == doctest::Approx(0.5));  // bus 12 omitted
    CHECK(d.gamma == doctest::Approx(0.1467));
    // D defaults to gamma * M
    CHECK(d.damping_at(12) == doctest::Approx(0.1467 * 0.5));
  }

  SUBCASE("gamma from mean damping over mean inertia") {
    std::string text;
    for (const Generator& g : c.gens) {
      text += "inertia " + std::to_string(g.bus) + " 3.0\n";
      text += "damping " + std::to_string(g.bus) + " 6.0\n";
      text += "xint " + std::to_string(g.bus) + " 0.05\n";
    }
    DynamicParams d = load_dynamics(text, c);
    CHECK(d.gamma == doctest::Approx(2.0));
  }

  SUBCASE("strict proportional damping enforced") {
    std::string text = "gamma 0.5\n";
    for (const Generator& g : c.gens) {
      text += "inertia " + std::to_string(g.bus) + " 2.0\n";
      text += "xint " + std::to_string(g.bus) + " 0.05\n";
    }
    text += "damping 30 0.9\n";  // should be 1.0
    CHECK_THROWS_AS(load_dynamics(text, c, /*strict_assumption=*/true), Error);
    CHECK_NOTHROW(load_dynamics(text, c, /*strict_assumption=*/false));
  }

  SUBCASE("rejects records for zero-injection buses") {
    std::string text = "gamma 0.1\ninertia 2 1.0\n";  // bus 2 has no injection
    CHECK_THROWS_WITH_AS(load_dynamics(text, c), doctest::Contains("zero-injection"),
                         ParseError);
  }

  SUBCASE("rejects nonpositive values") {
    CHECK_THROWS_AS(load_dynamics("gamma 0.1\ninertia 30 -1\n", c), ParseError);
    CHECK_THROWS_AS(load_dynamics("gamma -0.1\n", c), ParseError);
  }

  SUBCASE("shipped sidecar loads") {
    DynamicParams d = fixtures::ieee39_dyn(c);
    CHECK(d.gamma == doctest::Approx(0.1467));
    CHECK(d.inertia.size() == 29);
    CHECK(d.internal_reactance.size() == 29);
    double mean_m = 0;
    for (const Generator& g : c.gens) mean_m += d.inertia_at(g.bus);
    mean_m /= static_cast<double>(c.gens.size());
    CHECK(d.inertia_at(12) == doctest::Approx(0.1 * mean_m));
  }
}
