#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "fuller/orbits.hpp"

using namespace fuller;

namespace {

constexpr double kPi = std::numbers::pi;

// Planar limit cycle r' = r (1 - r^2), theta' = omega; the unit circle has
// period 2 pi / omega and transverse multiplier exp(-4 pi / omega).
VectorFieldSpec hopf_field(double omega) {
  VectorFieldSpec f;
  f.phase_dim = 2;
  f.eval = [omega](const Vec& z) {
    const double r2 = z.squaredNorm();
    Vec v(2);
    v << z(0) * (1 - r2) - omega * z(1), z(1) * (1 - r2) + omega * z(0);
    return v;
  };
  return f;
}

ClosedOrbitRecord with_return_map(const Mat& p) {
  ClosedOrbitRecord o;
  o.return_map = p;
  return o;
}

}  // namespace

TEST_CASE("planar degree of monomials") {
  for (int k = -3; k <= 3; ++k) {
    if (k == 0) continue;
    auto phi = [k](const Eigen::Vector2d& x) {
      const std::complex<double> z(x(0), x(1));
      const std::complex<double> w = k > 0 ? std::pow(z, k) : std::pow(std::conj(z), -k);
      return Eigen::Vector2d(w.real(), w.imag());
    };
    CHECK(planar_degree(phi, 0.5) == k);
  }
  auto shifted = [](const Eigen::Vector2d& x) { return Eigen::Vector2d(x(0) + 2.0, x(1)); };
  CHECK(planar_degree(shifted, 0.5) == 0);
}

TEST_CASE("fixed point index equals the winding of x - Px") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> n(0.0, 1.5);
  const IndexConvention conv{1, "raw"};
  int checked = 0;
  for (int k = 0; k < 200; ++k) {
    Eigen::Matrix2d p;
    p << n(rng), n(rng), n(rng), n(rng);
    const double det = (Eigen::Matrix2d::Identity() - p).determinant();
    if (std::abs(det) < 1e-3) continue;
    auto phi = [&p](const Eigen::Vector2d& x) { return Eigen::Vector2d(x - p * x); };
    const int degree = planar_degree(phi, 1.0);
    CHECK(degree == (det > 0 ? 1 : -1));
    CHECK(fixed_point_index(with_return_map(p), conv) == degree);
    ++checked;
  }
  CHECK(checked > 150);
}

TEST_CASE("index convention") {
  const IndexConvention c = calibrated_convention();
  CHECK((c.sigma == 1 || c.sigma == -1));
  CHECK(calibrate_sigma(-1) == -1);
  CHECK(calibrate_sigma(1) == 1);
  // hyperbolic return map diag(e, 1/e): det(I - P) < 0, counted +1
  Mat p = Mat::Zero(2, 2);
  p(0, 0) = std::exp(1.0);
  p(1, 1) = std::exp(-1.0);
  CHECK(fixed_point_index(with_return_map(p), c) == 1);
  CHECK_THROWS_AS(fixed_point_index(with_return_map(Mat::Identity(2, 2)), c), Error);
}

TEST_CASE("limit cycle period and multiplier") {
  const VectorFieldSpec f = hopf_field(2.0);
  Vec z(2);
  z << 1.05, 0.0;
  Vec normal(2);
  normal << 0.0, 1.0;
  const ClosedOrbitRecord o = find_closed_orbit(f, z, Section{Vec::Unit(2, 0), normal});
  CHECK(o.period == doctest::Approx(kPi).epsilon(1e-9));
  CHECK(o.residual < 1e-8);
  REQUIRE(o.section_dim() == 1);
  CHECK(o.return_map(0, 0) == doctest::Approx(std::exp(-2.0 * kPi)).epsilon(1e-6));
  CHECK(std::abs(o.start.norm() - 1.0) < 1e-8);
  REQUIRE(o.index.has_value());
  CHECK(*o.index == 1);
  CHECK(multiplicity(o) == 1);
}

TEST_CASE("waist geodesic multipliers") {
  WarpProfile w;
  const ModelSpace cyl = ModelSpace::warped_cylinder(w, 10.0);
  const GeodesicFlowField flow = geodesic_field(standard_metric(cyl), cyl);
  Vec z(4);
  z << 0, 0, 0, 1;
  const ClosedOrbitRecord o = find_closed_orbit(flow.field, z, Section{z, flow.field.eval(z)});
  CHECK(o.period == doctest::Approx(2 * kPi).epsilon(1e-10));
  // Jacobi equation J'' = J along r = 0: multipliers e^{+-l}
  const double l = 2 * kPi;
  std::vector<double> mags;
  for (auto m : o.multipliers) mags.push_back(std::abs(m));
  std::sort(mags.begin(), mags.end());
  REQUIRE(mags.size() >= 2);
  CHECK(mags.front() == doctest::Approx(std::exp(-l)).epsilon(1e-6));
  CHECK(mags.back() == doctest::Approx(std::exp(l)).epsilon(1e-6));
  CHECK(std::abs(o.monodromy_det - 1.0) < 1e-6);

  const ClosedOrbitRecord c3 = cover(o, 3, calibrated_convention());
  CHECK(c3.multiplicity == 3);
  CHECK(c3.period == doctest::Approx(3 * o.period));
  REQUIRE(c3.index.has_value());
  CHECK(*c3.index == *o.index);

  const Vec q = loop_at(o, o.period / 4);
  CHECK(std::abs(q(0)) < 1e-8);
  CHECK(flow.speed(q) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("dedupe by phase shift") {
  const VectorFieldSpec f = hopf_field(1.0);
  Vec normal(2);
  normal << 0.0, 1.0;
  Vec a(2), b(2), n2(2);
  a << 1.1, 0.0;
  b << -0.9, 0.0;
  n2 << 0.0, -1.0;
  const ClosedOrbitRecord o1 = find_closed_orbit(f, a, Section{Vec::Unit(2, 0), normal});
  const ClosedOrbitRecord o2 = find_closed_orbit(f, b, Section{Vec(-Vec::Unit(2, 0)), n2});
  CHECK(loop_distance(o1, o2, {}) < 1e-6);
  CHECK(s1_dedupe({o1, o2}, {}).size() == 1);
}

TEST_CASE("fuller sum is exact") {
  ClosedOrbitRecord a, b, c;
  a.index = 1;
  b.index = -1;
  b.multiplicity = 2;
  c.index = 1;
  c.multiplicity = 3;
  const FullerIndexResult r = fuller_index({a, b, c}, FreeHomotopyClass{});
  CHECK(r.value == Rational(1) - Rational(1, 2) + Rational(1, 3));
  CHECK(to_string(r.value) == "5/6");
  ClosedOrbitRecord d;
  CHECK_THROWS_AS(fuller_index({d}, FreeHomotopyClass{}), Error);
}

TEST_CASE("no return is reported") {
  VectorFieldSpec f;
  f.phase_dim = 2;
  f.eval = [](const Vec&) { return Vec::Unit(2, 0); };
  OrbitSearchOptions opt;
  opt.max_time = 5.0;
  CHECK_THROWS_AS(find_closed_orbit(f, Vec::Zero(2), Section{Vec::Zero(2), Vec::Unit(2, 0)}, opt), Error);
}
