#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fuller/io.hpp"
#include "fuller/models.hpp"
#include "fuller/rational.hpp"

using namespace fuller;

namespace {

// Hyperbolic distance in the upper half plane.
double hyperbolic_distance(const Vec& p, const Vec& q) {
  const double num = (p - q).squaredNorm();
  return std::acosh(1.0 + num / (2.0 * p(1) * q(1)));
}

Eigen::Matrix2d random_word_element(const FuchsianGroup& g, std::mt19937_64& rng, int len) {
  std::uniform_int_distribution<int> pick(1, 2 * g.genus);
  std::bernoulli_distribution inv(0.5);
  Word w;
  for (int i = 0; i < len; ++i) w.push_back(inv(rng) ? -pick(rng) : pick(rng));
  return g.element(w);
}

}  // namespace

TEST_CASE("word reduction") {
  CHECK(free_reduce({1, 2, -2, -1, 3}) == Word{3});
  CHECK(cyclic_reduce({-1, 2, 3, 1}) == Word{2, 3});
  CHECK(least_rotation({3, 1, 2}) == least_rotation({1, 2, 3}));
  CHECK(inverse_word({1, -2}) == Word{2, -1});
  CHECK(parse_word("ab'") == Word{1, -2});
  CHECK(word_to_string({1, -2}) == "ab'");
}

TEST_CASE("class parsing is canonical") {
  const ModelSpace oct = ModelSpace::fuchsian(regular_polygon_group(2));
  CHECK(parse_class("ab'", oct) == parse_class("b'a", oct));
  CHECK(parse_class("cab'c'", oct) == parse_class("ab'", oct));
  CHECK(parse_class("aa'", oct).constant());
  CHECK_THROWS_AS(parse_class("z", oct), Error);

  const ModelSpace t2 = ModelSpace::flat_torus(Mat::Identity(2, 2));
  const auto c = parse_class("(2,0)", t2);
  CHECK(c.lattice == LatticeVector{2, 0});
  CHECK(parse_class("(0,0)", t2).constant());
  CHECK_THROWS_AS(power_decomposition(parse_class("(0,0)", t2)), Error);
  CHECK_THROWS_AS(parse_class("(1,0,0)", t2), Error);
}

TEST_CASE("power decomposition") {
  const ModelSpace oct = ModelSpace::fuchsian(regular_polygon_group(2));
  const auto pd = power_decomposition(parse_class("abab", oct));
  CHECK(pd.n == 2);
  CHECK(pd.root == parse_class("ab", oct));
  CHECK(class_power(pd.root, 2) == parse_class("abab", oct));
  CHECK(power_decomposition(parse_class("ab'", oct)).n == 1);

  const ModelSpace t2 = ModelSpace::flat_torus(Mat::Identity(2, 2));
  const auto lp = power_decomposition(parse_class("(4,6)", t2));
  CHECK(lp.n == 2);
  CHECK(lp.root.lattice == LatticeVector{2, 3});
}

TEST_CASE("regular octagon group") {
  const FuchsianGroup g = regular_polygon_group(2);
  REQUIRE(g.generators.size() == 4);
  CHECK(g.relation_residual() < 1e-10);
  for (const auto& m : g.generators) CHECK(std::abs(m.determinant() - 1.0) < 1e-12);
  // Side i glued to side i + 2: the axis is the common perpendicular of the
  // side's perpendicular bisector and a ray at pi/2g from the center, so
  // cosh(l/2) = cosh(inradius) sin(pi/2g) with cosh(inradius) = cot(pi/4g).
  const double expected = 2.0 * std::acosh(std::sin(std::numbers::pi / 4.0) / std::tan(std::numbers::pi / 8.0));
  for (const auto& m : g.generators) CHECK(translation_length(m) == doctest::Approx(expected).epsilon(1e-12));
  CHECK_THROWS_AS(translation_length(Eigen::Matrix2d::Identity()), Error);
}

TEST_CASE("translation length is the displacement along the axis") {
  const FuchsianGroup g = regular_polygon_group(2);
  std::mt19937_64 rng(5);
  for (int k = 0; k < 10; ++k) {
    const Eigen::Matrix2d m = random_word_element(g, rng, 4);
    if (std::abs(m.trace()) <= 2.0 + 1e-9) continue;
    const double a = m(0, 0), b = m(0, 1), c = m(1, 0), d = m(1, 1);
    // fixed points of z -> (az + b)/(cz + d) on the real line
    const double disc = std::sqrt((a + d) * (a + d) - 4.0);
    const double p = (a - d + disc) / (2 * c), q = (a - d - disc) / (2 * c);
    Vec z(2);
    z << (p + q) / 2, std::abs(p - q) / 2;  // top of the axis
    const std::complex<double> w = (a * std::complex<double>(z(0), z(1)) + b) /
                                   (c * std::complex<double>(z(0), z(1)) + d);
    Vec gz(2);
    gz << w.real(), w.imag();
    CHECK(hyperbolic_distance(z, gz) == doctest::Approx(translation_length(m)).epsilon(1e-9));
  }
}

TEST_CASE("euler characteristics") {
  CHECK(euler_characteristic(ModelSpace::fuchsian(regular_polygon_group(2))) == -2);
  CHECK(euler_characteristic(ModelSpace::fuchsian(regular_polygon_group(3))) == -4);
  CHECK(euler_characteristic(ModelSpace::flat_torus(Mat::Identity(2, 2))) == 0);
  CHECK(euler_characteristic(ModelSpace::circle()) == 0);
}

TEST_CASE("deck transformations") {
  const ModelSpace t2 = ModelSpace::flat_torus(Mat::Identity(2, 2));
  const ClassDeck d = class_deck(t2, parse_class("(1,2)", t2));
  Vec x(2);
  x << 0.1, 0.2;
  const Vec y = d.apply<double>(x);
  CHECK((y - x).isApprox((Vec(2) << 1, 2).finished()));
  CHECK((d.inverse().apply<double>(y) - x).norm() < 1e-14);
  CHECK((d.power(3).apply<double>(x) - x).isApprox((Vec(2) << 3, 6).finished()));

  const ModelSpace oct = ModelSpace::fuchsian(regular_polygon_group(2));
  const ClassDeck h = class_deck(oct, parse_class("ab", oct));
  Vec p(2);
  p << 0.3, 0.7;
  CHECK((h.inverse().apply<double>(h.apply<double>(p)) - p).norm() < 1e-12);
  // isometry of the hyperbolic metric
  Vec q(2);
  q << -0.2, 1.3;
  CHECK(hyperbolic_distance(h.apply<double>(p), h.apply<double>(q)) ==
        doctest::Approx(hyperbolic_distance(p, q)).epsilon(1e-10));
}

TEST_CASE("metrics") {
  const ModelSpace t2 = ModelSpace::flat_torus(Mat::Identity(2, 2));
  Bump b;
  b.center = Vec::Constant(2, 0.5);
  b.radius = 0.3;
  b.amplitude = 0.01;
  const MetricSpec m = standard_metric(t2, {b});
  Vec c = Vec::Constant(2, 0.5);
  CHECK(m.tensor<double>(c)(0, 0) == doctest::Approx(1.01).epsilon(1e-14));
  Vec far(2);
  far << 0.0, 0.0;
  CHECK(m.tensor<double>(far)(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
  // periodicity
  Vec shifted = c + Vec::Constant(2, 3.0);
  CHECK(m.tensor<double>(shifted).isApprox(m.tensor<double>(c)));
  validate_metric(m, t2);

  const MetricSpec hyp = standard_metric(ModelSpace::fuchsian(regular_polygon_group(2)));
  Vec x(2);
  x << 0.0, 2.0;
  CHECK(hyp.tensor<double>(x)(0, 0) == doctest::Approx(0.25));

  const MetricJet jet = metric_jet(hyp, x, 1);
  CHECK(jet.dg[1](0, 0) == doctest::Approx(-2.0 / 8.0));

  Mat a = Mat::Identity(2, 2);
  Vec beta(2);
  beta << 0.3, 0.0;
  const MetricSpec r = randers_metric(a, beta);
  Vec v(2);
  v << 1, 0;
  CHECK(r.norm<double>(x, v) == doctest::Approx(1.3));
  CHECK(r.norm<double>(x, Vec(-v)) == doctest::Approx(0.7));
  Vec big(2);
  big << 1.5, 0;
  CHECK_THROWS_AS(randers_metric(a, big), Error);
}

TEST_CASE("morse data") {
  const MorseFunctionSpec c = circle_height();
  CHECK(c.signed_count() == 0);
  check_morse_data(c, ModelSpace::circle());
  const MorseFunctionSpec s = surface_height(2);
  CHECK(s.critical_points.size() == 6);
  CHECK(s.signed_count() == -2);
  CHECK_THROWS_AS(check_morse_data(s, ModelSpace::circle()), Error);
}

TEST_CASE("class maps") {
  const ClassMap swap = substitution_map({{3}, {4}, {1}, {2}}, {{3}, {4}, {1}, {2}});
  const ModelSpace oct = ModelSpace::fuchsian(regular_polygon_group(2));
  CHECK(swap.apply(parse_class("a", oct)) == parse_class("c", oct));
  CHECK(swap.apply_inverse(swap.apply(parse_class("ab'd", oct))) == parse_class("ab'd", oct));

  Eigen::MatrixXi m(2, 2);
  m << 2, 1, 1, 1;
  const ClassMap cat = lattice_map(m);
  const ModelSpace t2 = ModelSpace::flat_torus(Mat::Identity(2, 2));
  CHECK(cat.apply(parse_class("(1,0)", t2)).lattice == LatticeVector{2, 1});
}

TEST_CASE("model files") {
  const std::string text =
      R"({"kind": "flat_torus", "basis": [[1, 0], [0, 1]], "bumps": [{"center": [0.5, 0.5], "radius": 0.8, "amplitude": 0.01}]})";
  const ModelFile f = parse_model(text);
  CHECK(f.model.kind == ModelKind::FlatTorus);
  REQUIRE(f.bumps.size() == 1);
  CHECK(f.bumps[0].radius == 0.8);
  const ModelFile g = parse_model(dump_model(f));
  CHECK(dump_model(g) == dump_model(f));

  CHECK_THROWS_AS(parse_model(R"({"kind": "flat_torus", "basis": [[1,0],[0,1]], "colour": 3})"), Error);
  CHECK_THROWS_AS(parse_model(R"({"kind": "sphere"})"), Error);
  CHECK_THROWS_AS(parse_model("{"), Error);

  const ModelFile mt = parse_model(
      R"({"kind": "mapping_torus", "fiber": {"kind": "fuchsian", "genus": 2},
          "holonomy": {"images": ["c", "d", "a", "b"], "inverse_images": ["c", "d", "a", "b"]}})");
  CHECK(mt.model.kind == ModelKind::MappingTorus);
  CHECK(parse_model(dump_model(mt)).model.holonomy.images == mt.model.holonomy.images);
}

TEST_CASE("rationals") {
  CHECK(to_string(Rational(-5, 7)) == "-5/7");
  CHECK(to_string(Rational(4, 2)) == "2");
  CHECK(parse_rational("3/6") == Rational(1, 2));
}
