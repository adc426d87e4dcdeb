#include <doctest.h>

#include "fuller/invariant.hpp"

using namespace fuller;

namespace {

ModelSpace octagon() { return ModelSpace::fuchsian(regular_polygon_group(2)); }

ModelSpace bump_torus_model() { return ModelSpace::flat_torus(Mat::Identity(2, 2)); }

MetricSpec bump_torus_metric() {
  Bump b;
  b.center = Vec::Constant(2, 0.5);
  b.radius = 0.8;
  b.amplitude = 0.01;
  return standard_metric(bump_torus_model(), {b});
}

VariationalOptions quick() {
  VariationalOptions o;
  o.n_seeds = 16;
  return o;
}

}  // namespace

TEST_CASE("F on powers of a simple class is 1/n") {
  const ModelSpace oct = octagon();
  const MetricSpec met = standard_metric(oct);
  for (int n = 1; n <= 3; ++n) {
    const InvariantReport r = F_invariant(met, oct, parse_class(std::string(n, 'a'), oct));
    CHECK(r.F == Rational(1, n));
    CHECK(r.consistent());
    REQUIRE(r.ledger.size() == 1);
    CHECK(r.ledger[0].multiplicity == n);
  }
  const InvariantReport ab = F_invariant(met, oct, parse_class("ab'", oct));
  CHECK(ab.F == Rational(1));
}

TEST_CASE("Morse count matches the Fuller sum") {
  const ModelSpace oct = octagon();
  CHECK(euler_characteristic_route(standard_metric(oct), oct, parse_class("a", oct)) == 1);
  CHECK_THROWS_AS(euler_characteristic_route(standard_metric(oct), oct, parse_class("aa", oct)), Error);

  const InvariantReport r = F_invariant(bump_torus_metric(), bump_torus_model(), parse_class("(1,0)", bump_torus_model()),
                                        quick());
  CHECK(r.F == Rational(0));
  CHECK(r.ledger.size() == 2);
  CHECK(r.consistent());
  bool morse = false;
  for (const auto& [route, v] : r.consistency) morse = morse || (route == Route::MorseCount && v == Rational(0));
  CHECK(morse);
}

TEST_CASE("degenerate families ask for a perturbation") {
  const ModelSpace t2 = bump_torus_model();
  try {
    F_invariant(standard_metric(t2), t2, parse_class("(1,0)", t2), quick());
    FAIL("expected PerturbationRequired");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::PerturbationRequired);
  }
}

TEST_CASE("holonomy orbits") {
  const ModelSpace oct = octagon();
  const ClassMap swap = substitution_map({{3}, {4}, {1}, {2}}, {{3}, {4}, {1}, {2}});
  HolonomySpec spec{{swap}, parse_class("a", oct)};
  check_holonomy(spec, 4);
  CHECK(holonomy_orbit_card(spec) == 2);
  spec.base_class = parse_class("ac", oct);
  CHECK(holonomy_orbit_card(spec) == 1);

  // a -> ab has infinite orbit of a
  const ClassMap twist = substitution_map({{1, 2}, {2}, {3}, {4}}, {{1, -2}, {2}, {3}, {4}});
  HolonomySpec inf{{twist}, parse_class("a", oct), 50};
  check_holonomy(inf, 4);
  CHECK_THROWS_AS(holonomy_orbit(inf), Error);

  CHECK_THROWS_AS(substitution_map({{1}, {1}, {3}, {4}}, {{1}, {1}, {3}, {4}}), Error);

  Eigen::MatrixXi m(2, 2);
  m << 0, 1, 1, 0;
  HolonomySpec lat{{lattice_map(m)}, parse_class("(1,0)", bump_torus_model())};
  check_holonomy(lat, 2);
  CHECK(holonomy_orbit_card(lat) == 2);
}

TEST_CASE("product formula") {
  CHECK(product_formula(-2, 1, Rational(1)) == Rational(-2));
  CHECK(product_formula(-10, 1, Rational(1, 14)) == Rational(-5, 7));
  CHECK(product_formula(0, 2, Rational(1)) == Rational(0));
  CHECK_THROWS_AS(product_formula(1, 0, Rational(1)), Error);
}

TEST_CASE("every rational is realized") {
  struct Case {
    long p, q;
    int sign;
    Rational expected;
  };
  for (const Case& c : {Case{1, 1, -1, Rational(-1)}, Case{2, 3, -1, Rational(-2, 3)}, Case{5, 7, -1, Rational(-5, 7)},
                        Case{3, 2, 1, Rational(3, 2)}, Case{4, 5, 0, Rational(0)}}) {
    const RationalRealization r = realize_rational(c.p, c.q, c.sign);
    CHECK(r.value == c.expected);
    CHECK(r.pass);
    CHECK(r.fiber_value == r.fiber_expected);
  }
  const RationalRealization r = realize_rational(5, 7, -1);
  CHECK(r.fiber_value == Rational(1, 14));
  CHECK(r.construction == "genus-6 × genus-2, class = (generator)^14");
  CHECK_THROWS_AS(realize_rational(0, 1, -1), Error);
}

TEST_CASE("product routes agree on the two-torus") {
  const ModelSpace t2 = ModelSpace::product(ModelSpace::circle(), ModelSpace::circle());
  const ProductReport r = verify_euler_product(t2, parse_class("(1,0)", t2), circle_height());
  CHECK(r.structural == Rational(0));
  CHECK(r.formula == Rational(0));
  REQUIRE(r.full_ode.has_value());
  CHECK(*r.full_ode == Rational(0));
  CHECK(r.ode_orbits.size() == 2);
  CHECK(r.condition_defect < 1e-10);
  CHECK(r.vertical_increase < 1e-8);
  CHECK(r.pass);
}

TEST_CASE("product over a genus-2 base") {
  const ModelSpace gg = ModelSpace::product(octagon(), octagon());
  const ProductReport r = verify_euler_product(gg, parse_class("a", gg), surface_height(2));
  CHECK(r.structural == Rational(-2));
  CHECK(r.formula == Rational(-2));
  CHECK(r.chi == -2);
  CHECK(r.pass);
}

TEST_CASE("mapping torus with swap holonomy") {
  const ClassMap swap = substitution_map({{3}, {4}, {1}, {2}}, {{3}, {4}, {1}, {2}});
  const ModelSpace mt = ModelSpace::mapping_torus(octagon(), swap);
  const ProductReport r = verify_euler_product(mt, parse_class("a", mt), circle_height());
  CHECK(r.card == 2);
  CHECK(r.structural == Rational(0));
  CHECK(r.formula == Rational(0));
  CHECK(r.pass);
}

TEST_CASE("perturbed product flow") {
  const ModelSpace t2 = ModelSpace::product(ModelSpace::circle(), ModelSpace::circle());
  const MetricSpec met = standard_metric(t2);
  const VectorFieldSpec v0 = perturbed_product_flow(met, t2, circle_height(), 0.0);
  const GeodesicFlowField g = geodesic_field(met, t2);
  Vec z(4);
  z << 0.1, 0.3, 0.6, 0.8;
  CHECK((v0.eval(z) - g.field.eval(z)).norm() < 1e-14);
  const VectorFieldSpec v1 = perturbed_product_flow(met, t2, circle_height(), 0.1);
  CHECK(vertical_energy_increase(v1, met, t2) < 1e-8);
  // on a horizontal direction the fiber energy P vanishes, so only the base gradient acts
  Vec h(4);
  h << 0.1, 0.3, 1.0, 0.0;
  const Vec d = v1.eval(h) - g.field.eval(h);
  CHECK(std::abs(d(0)) < 1e-12);
  CHECK(d.head(2).norm() > 0);
  const ModelSpace gg = ModelSpace::product(octagon(), octagon());
  CHECK_THROWS_AS(perturbed_product_flow(standard_metric(gg), gg, surface_height(2), 0.1), Error);
}

TEST_CASE("report json") {
  const ModelSpace oct = octagon();
  const std::string j = report_json(F_invariant(standard_metric(oct), oct, parse_class("aa", oct)));
  CHECK(j.find("\"F\": \"1/2\"") != std::string::npos);
}
