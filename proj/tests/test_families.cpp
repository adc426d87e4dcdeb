#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fuller/families.hpp"

using namespace fuller;

namespace {

const char* kEscape = R"({"kind": "field_family", "parameterization": {"name": "escape"}, "window": 10})";
const char* kFold = R"({"kind": "field_family", "parameterization": {"name": "fold", "fold_at": 0.5}})";
const char* kBlowUp = R"({"kind": "field_family", "parameterization": {"name": "blow_up"}})";
const char* kOctagon =
    R"({"kind": "metric_family", "model": {"kind": "fuchsian", "genus": 2},
        "parameterization": {"name": "scaling", "from": 1, "to": 1.5}})";

}  // namespace

TEST_CASE("family files") {
  const FamilySpec f = parse_family(kOctagon);
  CHECK(f.kind == FamilyKind::Metric);
  validate_family(f);
  CHECK_THROWS_AS(parse_family(R"({"kind": "field_family", "parameterization": {"name": "escape"}, "speed": 2})"),
                  Error);
  CHECK_THROWS_AS(parse_family(R"({"kind": "field_family", "parameterization": {"name": "spiral"}})"), Error);
  CHECK_THROWS_AS(parse_family(R"({"kind": "metric_family", "parameterization": {"name": "scaling", "from": 1, "to": 2}})"),
                  Error);
  CHECK_THROWS_AS(
      validate_family(parse_family(R"({"kind": "metric_family", "model": {"kind": "fuchsian", "genus": 2},
                       "parameterization": {"name": "scaling", "from": 1, "to": -1}})")),
      Error);
}

TEST_CASE("fold of the saddle-node normal form") {
  const FamilySpec f = parse_family(kFold);
  const auto cls = f.parse("(1)");
  const auto starts = endpoint_orbits(f, cls, 0.0);
  REQUIRE_FALSE(starts.empty());
  const FamilyBranch b = continue_branch(f, starts[0], 0.0);
  CHECK(b.status == BranchStatus::Fold);
  REQUIRE(b.folds.size() == 1);
  CHECK(std::abs(b.folds[0].t - 0.5) < 1e-4);
  CHECK(b.folds[0].unit_multiplier_gap < 1e-4);
  // cycles sit at r = 1 +- sqrt(t_fold - t), all of period 2 pi
  for (const BranchPoint& p : b.points) {
    const double r = p.orbit.start(0);
    CHECK(std::abs((r - 1) * (r - 1) - (0.5 - p.t)) < 1e-7);
    CHECK(p.orbit.period == doctest::Approx(2 * std::numbers::pi).epsilon(1e-8));
  }
  const std::string csv = branch_csv(b);
  CHECK(csv.rfind("# status Fold", 0) == 0);
  CHECK(csv.find("\nt,s,period,z0,z1,z2") != std::string::npos);
}

TEST_CASE("escaping family is flagged") {
  const FamilySpec f = parse_family(kEscape);
  const SkyReport r = sky_analysis(f, f.parse("(1)"));
  CHECK(r.flagged);
  CHECK(r.verdict == "catastrophe in class (1): EscapedWindow at t→1");
  ContinuationSettings doubled;
  doubled.window_factor = 2;
  doubled.ceiling_factor = 2;
  CHECK(sky_analysis(f, f.parse("(1)"), doubled).flagged);
}

TEST_CASE("period blow-up") {
  const FamilySpec f = parse_family(kBlowUp);
  const SkyReport r = sky_analysis(f, f.parse("(1)"));
  CHECK(r.flagged);
  bool blow = false;
  for (const auto& b : r.branches) blow = blow || b.branch.end_reason == BranchStatus::PeriodBlowUp;
  CHECK(blow);
}

TEST_CASE("octagon scaling: no catastrophe, zero spread, invariant F") {
  const FamilySpec f = parse_family(kOctagon);
  const auto cls = f.parse("a");
  const SkyReport sky = sky_analysis(f, cls);
  CHECK_FALSE(sky.flagged);
  CHECK(sky.verdict == "no catastrophe observed within budget");
  for (const auto& b : sky.branches) {
    CHECK(b.branch.end_reason == BranchStatus::ReachedEndpoint);
    // length of a scales linearly
    const auto& last = b.branch.points.back();
    const double l0 = translation_length(regular_polygon_group(2).generators[0]);
    CHECK(last.orbit.period == doctest::Approx(l0 * (1.0 + 0.5 * last.t)).epsilon(1e-7));
  }
  const SpreadReport s = length_spread_criterion(f, cls, 5);
  CHECK(s.satisfied);
  CHECK(s.sup < 1e-9);
  CHECK(s.verdict == "sup spread = 0.00; criterion satisfied");
  const InvarianceReport inv = basic_invariance_check(f, cls, {0.25, 0.5, 0.75});
  CHECK(inv.equal);
  CHECK(inv.F0 == Rational(1));
  for (const auto& [t, v] : inv.interior) CHECK(v == Rational(1));
}

TEST_CASE("geodesibility") {
  const ModelSpace t2 = ModelSpace::flat_torus(Mat::Identity(2, 2));
  const MetricSpec flat = standard_metric(t2);
  VectorFieldSpec straight;
  straight.phase_dim = 2;
  straight.eval = [](const Vec&) { return Vec((Vec(2) << 0.6, 0.8).finished()); };
  CHECK(geodesible_check(straight, flat, t2).consistent);

  VectorFieldSpec wavy;
  wavy.phase_dim = 2;
  wavy.eval = [](const Vec& x) {
    Vec v(2);
    v << 1.0, 0.3 * std::sin(2 * std::numbers::pi * x(0));
    return Vec(v.normalized());
  };
  CHECK_FALSE(geodesible_check(wavy, flat, t2).consistent);

  CHECK(geodesible_check(geodesic_field(flat, t2).field, flat, t2).consistent);
  const ModelSpace oct = ModelSpace::fuchsian(regular_polygon_group(2));
  const MetricSpec hyp = standard_metric(oct);
  CHECK(geodesible_check(geodesic_field(hyp, oct).field, hyp, oct).consistent);
}
