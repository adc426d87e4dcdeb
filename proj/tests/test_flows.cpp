#include <doctest.h>

#include <cmath>
#include <numbers>

#include <unsupported/Eigen/MatrixFunctions>

#include "fuller/flows.hpp"

using namespace fuller;

namespace {

VectorFieldSpec linear_field(const Mat& a) {
  VectorFieldSpec f;
  f.phase_dim = static_cast<int>(a.rows());
  f.eval = [a](const Vec& z) { return Vec(a * z); };
  f.jacobian = [a](const Vec&) { return a; };
  return f;
}

}  // namespace

TEST_CASE("adaptive integrator on the harmonic oscillator") {
  Mat a(2, 2);
  a << 0, 1, -1, 0;
  StepStats stats;
  Vec y0(2);
  y0 << 1, 0;
  const auto end = integrate_adaptive([&](const Vec& z) { return Vec(a * z); }, y0, 0.0, 10.0, IntegratorOptions{},
                                      stats);
  CHECK(std::abs(end.y(0) - std::cos(10.0)) < 1e-8);
  CHECK(std::abs(end.y(1) + std::sin(10.0)) < 1e-8);
  CHECK(stats.accepted > 0);
}

TEST_CASE("observer stops integration") {
  Mat a = Mat::Identity(1, 1);
  StepStats stats;
  const auto end = integrate_adaptive([&](const Vec& z) { return Vec(a * z); }, Vec::Ones(1), 0.0, 5.0,
                                      IntegratorOptions{}, stats,
                                      [](double, const Vec&, double, const Vec& y) { return y(0) < 2.0; });
  CHECK(end.stopped);
  CHECK(end.t < 5.0);
}

TEST_CASE("non-finite field is reported") {
  StepStats stats;
  CHECK_THROWS_AS(integrate_adaptive([](const Vec& z) { return Vec(z.array() / 0.0); }, Vec::Zero(1), 0.0, 1.0,
                                     IntegratorOptions{}, stats),
                  Error);
}

TEST_CASE("monodromy of a linear field is the matrix exponential") {
  Mat a(3, 3);
  a << 0.1, 1, 0, -1, -0.2, 0.3, 0, 0.5, -0.1;
  const VectorFieldSpec f = linear_field(a);
  Vec x0(3);
  x0 << 1, 0.5, -0.2;
  const FlowWithMonodromy r = integrate_with_monodromy(f, x0, 2.0);
  const Mat expected = Mat(a * 2.0).exp();
  CHECK((r.monodromy - expected).norm() < 1e-8);
  CHECK((r.end - expected * x0).norm() < 1e-8);
}

TEST_CASE("angle reduction") {
  const auto [x, k] = reduce_angle(2.25, 1.0);
  CHECK(x == doctest::Approx(0.25));
  CHECK(k == 2);
  const auto [y, m] = reduce_angle(-0.5, 1.0);
  CHECK(y == doctest::Approx(0.5));
  CHECK(m == -1);
}

TEST_CASE("flat torus geodesics are straight lines") {
  const ModelSpace t2 = ModelSpace::flat_torus(Mat::Identity(2, 2));
  const GeodesicFlowField flow = geodesic_field(standard_metric(t2), t2);
  Vec x(2);
  x << 0.1, 0.2;
  Vec d(2);
  d << 3, 4;
  const Vec z = flow.unit_phase_point(x, d);
  CHECK(flow.speed(z) == doctest::Approx(1.0));
  const Trajectory tr = integrate_flow(flow.field, z, 5.0);
  CHECK(tr.end_unwrapped(0) == doctest::Approx(0.1 + 3.0).epsilon(1e-9));
  CHECK(tr.end_unwrapped(1) == doctest::Approx(0.2 + 4.0).epsilon(1e-9));
  CHECK(tr.winding[0] == 3);
  CHECK(tr.winding[1] == 4);
  for (const Vec& s : tr.states) {
    CHECK(s(0) >= 0.0);
    CHECK(s(0) < 1.0);
  }
}

TEST_CASE("hyperbolic geodesic flow follows semicircles") {
  const ModelSpace oct = ModelSpace::fuchsian(regular_polygon_group(2));
  const GeodesicFlowField flow = geodesic_field(standard_metric(oct), oct);
  // vertical geodesic x = 0: y(t) = e^t
  Vec x(2);
  x << 0.0, 1.0;
  Vec d(2);
  d << 0.0, 1.0;
  const FlowWithMonodromy r = integrate_with_monodromy(flow.field, flow.unit_phase_point(x, d), 1.5);
  CHECK(r.end(1) == doctest::Approx(std::exp(1.5)).epsilon(1e-9));
  CHECK(std::abs(r.end(0)) < 1e-10);
  // Liouville density in chart coordinates (x, y, dx, dy) is y^-4
  CHECK(r.monodromy.determinant() == doctest::Approx(std::exp(4 * 1.5)).epsilon(1e-7));

  // semicircle |z| = 1 from i, tilted start: stays on the circle
  d << 1.0, 0.0;
  const Trajectory tr = integrate_flow(flow.field, flow.unit_phase_point(x, d), 1.0);
  for (const Vec& s : tr.states) CHECK(s.head(2).norm() == doctest::Approx(1.0).epsilon(1e-9));
  // x(t) = tanh t along the unit semicircle
  CHECK(tr.states.back()(0) == doctest::Approx(std::tanh(1.0)).epsilon(1e-9));
}

TEST_CASE("geodesic fields are Reeb fields") {
  const ModelSpace oct = ModelSpace::fuchsian(regular_polygon_group(2));
  CHECK(reeb_conditions_check(geodesic_field(standard_metric(oct), oct), 50).ok());
  const ModelSpace t2 = ModelSpace::flat_torus(Mat::Identity(2, 2));
  Bump b;
  b.center = Vec::Constant(2, 0.5);
  b.radius = 0.8;
  b.amplitude = 0.01;
  CHECK(reeb_conditions_check(geodesic_field(standard_metric(t2, {b}), t2), 50).ok());
  WarpProfile w;
  const ModelSpace cyl = ModelSpace::warped_cylinder(w, 10.0);
  CHECK(reeb_conditions_check(geodesic_field(standard_metric(cyl), cyl), 50).ok());
}

TEST_CASE("energy is conserved along the flow") {
  WarpProfile w;
  const ModelSpace cyl = ModelSpace::warped_cylinder(w, 10.0);
  const GeodesicFlowField flow = geodesic_field(standard_metric(cyl), cyl);
  Vec x(2);
  x << 0.3, 0.0;
  Vec d(2);
  d << 0.2, 1.0;
  const Trajectory tr = integrate_flow(flow.field, flow.unit_phase_point(x, d), 6.0);
  double worst = 0.0;
  for (const Vec& s : tr.states) worst = std::max(worst, std::abs(flow.speed(s) - 1.0));
  CHECK(worst < 1e-8);
  // Clairaut: w(r)^2 dtheta/dt is constant
  const Vec& s0 = tr.states.front();
  const Vec& s1 = tr.states.back();
  CHECK(std::pow(std::cosh(s1(0)), 2) * s1(3) == doctest::Approx(std::pow(std::cosh(s0(0)), 2) * s0(3)).epsilon(1e-7));
}

TEST_CASE("finite difference jacobian") {
  auto f = [](const Vec& z) {
    Vec r(2);
    r << std::sin(z(0)) * z(1), z(0) * z(0);
    return r;
  };
  Vec z(2);
  z << 0.4, 2.0;
  Mat j = finite_difference_jacobian(f, z);
  Mat e(2, 2);
  e << std::cos(0.4) * 2.0, std::sin(0.4), 0.8, 0.0;
  CHECK((j - e).norm() < 1e-7);
}
