// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "fuller/families.hpp"
#include "fuller/invariant.hpp"
#include "fuller/io.hpp"

using namespace fuller;

namespace {

// Pinned tolerances.
constexpr double kVariationalLengthRel = 1e-5;
constexpr double kMultiplierRel = 1e-6;
constexpr double kDetTol = 1e-6;
constexpr double kRefineRel = 1e-6;
constexpr double kSpreadOracleTol = 1e-6;
constexpr double kBumpSpreadBound = 0.1;

// Pinned time budgets, seconds.
constexpr double kAlgebraicBudget = 1.0;
constexpr double kVariationalBudget = 60.0;
constexpr double kRationalBudget = 5.0;
constexpr double kEulerBudget = 120.0;
constexpr double kProductBudget = 300.0;
constexpr double kInvarianceBudget = 300.0;
constexpr double kIndexBudget = 10.0;
constexpr double kSkyBudget = 120.0;
constexpr double kSpreadBudget = 120.0;

const std::string kData = FULLER_DATA_DIR;

class Clock {
 public:
  Clock() : t0_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  }

 private:
  std::chrono::steady_clock::time_point t0_;
};

struct Criterion {
  bool pass = true;
  std::vector<std::string> notes;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      notes.push_back("FAILED " + what);
    }
  }
  void note(const std::string& s) { notes.push_back(s); }
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

int failures = 0;

void run(int id, const std::string& title, const std::function<void(Criterion&)>& body) {
  Criterion c;
  Clock clock;
  try {
    body(c);
  } catch (const std::exception& e) {
    c.pass = false;
    c.notes.push_back(std::string("exception: ") + e.what());
  }
  std::printf("criterion %2d: %s  %s (%.2f s)\n", id, c.pass ? "PASS" : "FAIL", title.c_str(), clock.seconds());
  for (const auto& n : c.notes) std::printf("    %s\n", n.c_str());
  std::fflush(stdout);
  if (!c.pass) ++failures;
}

ModelSpace octagon() { return ModelSpace::fuchsian(regular_polygon_group(2)); }

VariationalOptions seeds(int n) {
  VariationalOptions o;
  o.n_seeds = n;
  return o;
}

// Orbits collected for the determinant check.
std::vector<std::pair<std::string, ClosedOrbitRecord>> geodesic_orbits;

// Bump conformal factor summed over lattice images, and the length of the
// horizontal reflection-axis geodesic at height y.
double horizontal_length(double y, double amplitude) {
  auto psi = [&](double x) {
    double s = 1.0;
    for (int i = -2; i <= 2; ++i)
      for (int j = -2; j <= 2; ++j) {
        const double dx = x - 0.5 - i, dy = y - 0.5 - j;
        const double q = 1.0 - (dx * dx + dy * dy) / 0.64;
        if (q > 0) s += amplitude * q * q * q;
      }
    return std::sqrt(s);
  };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(psi, 0.0, 1.0, 15, 1e-14);
}

void criterion_1(Criterion& c) {
  const ModelSpace oct = octagon();
  const MetricSpec met = standard_metric(oct);
  const double la = translation_length(regular_polygon_group(2).generators[0]);
  for (int n = 1; n <= 3; ++n) {
    const std::string w(static_cast<std::size_t>(n), 'a');
    const FreeHomotopyClass cls = parse_class(w, oct);
    Clock alg;
    const InvariantReport r = F_invariant(met, oct, cls);
    const double ta = alg.seconds();
    c.require(r.F == Rational(1, n), "F(" + w + ") = " + to_string(r.F));
    c.require(ta < kAlgebraicBudget, "algebraic time " + fmt("%.3f s", ta));

    Clock var;
    const VariationalResult vr = variational_closed_geodesics(met, oct, cls, seeds(8));
    const double tv = var.seconds();
    c.require(vr.strings.size() == 1, "variational string count for " + w);
    const double rel = vr.strings.empty() ? 1.0 : std::abs(vr.strings[0].length - n * la) / (n * la);
    c.require(rel < kVariationalLengthRel, "variational length " + w);
    c.require(tv < kVariationalBudget, "variational time " + fmt("%.1f s", tv));
    c.note("F(" + w + ") = " + to_string(r.F) + ", algebraic " + fmt("%.3f s", ta) + ", variational length rel. error " +
           fmt("%.1e", rel) + " in " + fmt("%.1f s", tv));
    geodesic_orbits.emplace_back("octagon " + w,
                                 lift_to_unit_bundle(hyperbolic_closed_geodesic(oct.group, cls), met, oct));
  }
}

void criterion_2(Criterion& c) {
  struct Case {
    long p, q;
    int sign;
    Rational expected;
  };
  for (const Case& k : {Case{1, 1, -1, Rational(-1)}, Case{2, 3, -1, Rational(-2, 3)},
                        Case{5, 7, -1, Rational(-5, 7)}, Case{3, 2, 1, Rational(3, 2)}}) {
    Clock clock;
    const RationalRealization r = realize_rational(k.p, k.q, k.sign);
    const double t = clock.seconds();
    const std::string tag = std::to_string(k.p) + "/" + std::to_string(k.q) + (k.sign > 0 ? " positive" : "");
    c.require(r.value == k.expected, tag + ": F = " + to_string(r.value));
    // the fiber class is (generator)^(2q') with q' = q, or 2q in positive mode
    const long qf = k.sign > 0 ? 2 * k.q : k.q;
    c.require(r.fiber_value == Rational(1, 2 * qf), tag + ": fiber value " + to_string(r.fiber_value));
    c.require(r.pass, tag + ": realization report");
    c.require(t < kRationalBudget, tag + ": time " + fmt("%.2f s", t));
    c.note(r.construction + "; F = " + to_string(r.value) + ", fiber F = " + to_string(r.fiber_value) + " (" +
           fmt("%.2f s", t) + ")");
  }
}

void criterion_3(Criterion& c) {
  Clock clock;
  const ModelFile bump = load_model(kData + "/torus_bump.json");
  const MetricSpec met = bump.metric();
  const FreeHomotopyClass cls = parse_class("(1,0)", bump.model);
  const InvariantReport r = F_invariant(met, bump.model, cls);
  Rational fuller{99}, morse{99};
  for (const auto& [route, v] : r.consistency) {
    if (route == Route::FullerSum) fuller = v;
    if (route == Route::MorseCount) morse = v;
  }
  c.require(fuller == Rational(0) && morse == Rational(0), "bump torus routes");
  std::vector<int> indices;
  for (const auto& e : r.ledger) indices.push_back(e.morse_index.value_or(-1));
  std::sort(indices.begin(), indices.end());
  c.require(indices == std::vector<int>{0, 1}, "bump torus string Morse indices");
  c.note("bump torus (1,0): FullerSum = " + to_string(fuller) + ", MorseCount = " + to_string(morse) + ", " +
         std::to_string(r.ledger.size()) + " strings");

  for (const auto& s : geodesic_strings(met, bump.model, cls))
    geodesic_orbits.emplace_back("bump torus L=" + fmt("%.6f", s.length), lift_to_unit_bundle(s, met, bump.model));

  const ModelSpace oct = octagon();
  const InvariantReport h = F_invariant(standard_metric(oct), oct, parse_class("a", oct));
  const int count = euler_characteristic_route(standard_metric(oct), oct, parse_class("a", oct));
  c.require(h.F == Rational(1) && count == 1 && h.consistent(), "octagon routes");
  c.note("octagon a: FullerSum = " + to_string(h.F) + ", MorseCount = " + std::to_string(count));
  const double t = clock.seconds();
  c.require(t < kEulerBudget, "time " + fmt("%.1f s", t));
}

void criterion_4(Criterion& c) {
  Clock clock;
  const ModelFile t2 = load_model(kData + "/t2_product.json");
  const ProductReport a = verify_euler_product(t2.model, parse_class("(1,0)", t2.model), circle_height());
  c.require(a.structural == Rational(0) && a.formula == Rational(0) && a.full_ode && *a.full_ode == Rational(0),
            "T^2 routes");
  c.require(a.pass, "T^2 report");
  c.note("T^2: structural " + to_string(a.structural) + " = formula " + to_string(a.formula) + " = full-ODE " +
         (a.full_ode ? to_string(*a.full_ode) : std::string("missing")) + " (" +
         std::to_string(a.ode_orbits.size()) + " ODE orbits)");

  const ModelFile gg = load_model(kData + "/genus2_product.json");
  const ProductReport b = verify_euler_product(gg.model, parse_class("a", gg.model), surface_height(2));
  c.require(b.structural == Rational(-2) && b.formula == Rational(-2) && b.pass, "genus-2 product");
  c.note("genus-2 x genus-2: structural " + to_string(b.structural) + " = formula " + to_string(b.formula));

  const ModelFile mt = load_model(kData + "/swap_torus.json");
  const ProductReport s = verify_euler_product(mt.model, parse_class("a", mt.model), circle_height());
  c.require(s.card == 2 && s.structural == Rational(0) && s.formula == Rational(0) && s.pass, "swap mapping torus");
  c.note("swap mapping torus: card " + std::to_string(s.card) + ", value " + to_string(s.formula));
  const double t = clock.seconds();
  c.require(t < kProductBudget, "time " + fmt("%.1f s", t));
}

void criterion_5(Criterion& c) {
  Clock clock;
  const std::vector<double> interior = {1.0 / 6, 2.0 / 6, 3.0 / 6, 4.0 / 6, 5.0 / 6};
  for (const auto& [file, cls, n] : {std::tuple{"scaling.json", "(1,0)", 16}, std::tuple{"octagon_path.json", "a", 8}}) {
    const FamilySpec f = load_family(kData + "/" + file);
    const InvarianceReport r = basic_invariance_check(f, f.parse(cls), interior, seeds(n));
    bool all = r.equal && r.interior.size() == interior.size();
    std::string values;
    for (const auto& [t, v] : r.interior) {
      all = all && v == r.F0;
      values += " " + to_string(v);
    }
    c.require(all, std::string(file) + " invariance");
    c.note(std::string(file) + ": F(0) = " + to_string(r.F0) + ", F(1) = " + to_string(r.F1) + ", interior" + values);
  }
  const double t = clock.seconds();
  c.require(t < kInvarianceBudget, "time " + fmt("%.1f s", t));
}

void criterion_6(Criterion& c) {
  const ModelFile cyl = load_model(kData + "/cosh_cylinder.json");
  const MetricSpec met = cyl.metric();
  const GeodesicFlowField flow = geodesic_field(met, cyl.model);
  Vec z(4);
  z << 0, 0, 0, 1;
  const ClosedOrbitRecord o = find_closed_orbit(flow.field, z, Section{z, flow.field.eval(z)});
  // Jacobi fields along r = 0 solve J'' = J: multipliers e^{+-l}, l = 2 pi
  const double l = 2 * std::numbers::pi;
  std::vector<double> mags;
  for (auto m : o.multipliers) mags.push_back(std::abs(m));
  std::sort(mags.begin(), mags.end());
  const double lo = mags.empty() ? 0 : std::abs(mags.front() / std::exp(-l) - 1);
  const double hi = mags.empty() ? 0 : std::abs(mags.back() / std::exp(l) - 1);
  c.require(mags.size() == 2 && lo < kMultiplierRel && hi < kMultiplierRel, "waist multipliers");
  c.note("waist: period " + fmt("%.12f", o.period) + ", multiplier rel. errors " + fmt("%.1e", lo) + ", " +
         fmt("%.1e", hi));
  geodesic_orbits.emplace_back("cosh waist", o);

  const ModelSpace oct = octagon();
  geodesic_orbits.emplace_back(
      "octagon ab'", lift_to_unit_bundle(hyperbolic_closed_geodesic(oct.group, parse_class("ab'", oct)),
                                         standard_metric(oct), oct));
  double worst = 0;
  for (const auto& [name, rec] : geodesic_orbits) {
    const double d = std::abs(rec.monodromy_det - 1.0);
    worst = std::max(worst, d);
    c.require(d < kDetTol, "det(monodromy) on " + name);
  }
  c.note("det(monodromy) - 1 over " + std::to_string(geodesic_orbits.size()) + " orbits: max " + fmt("%.1e", worst));
}

void criterion_7(Criterion& c) {
  Clock clock;
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> n(0.0, 2.0);
  const IndexConvention raw{1, "raw"};
  int cases = 0, agree = 0;
  while (cases < 1000) {
    Eigen::Matrix2d p;
    p << n(rng), n(rng), n(rng), n(rng);
    const double det = (Eigen::Matrix2d::Identity() - p).determinant();
    if (std::abs(det) < 1e-6) continue;
    ++cases;
    const int degree = planar_degree([&p](const Eigen::Vector2d& x) { return Eigen::Vector2d(x - p * x); }, 1.0);
    ClosedOrbitRecord rec;
    rec.return_map = p;
    const int sign = det > 0 ? 1 : -1;
    if (degree == sign && fixed_point_index(rec, raw) == sign) ++agree;
  }
  const double t = clock.seconds();
  c.require(agree == cases, std::to_string(cases - agree) + " disagreements");
  c.require(t < kIndexBudget, "time " + fmt("%.2f s", t));
  c.note(std::to_string(agree) + "/" + std::to_string(cases) + " maps agree");
}

void criterion_8(Criterion& c) {
  Clock clock;
  ContinuationSettings doubled;
  doubled.ceiling_factor = 2;
  doubled.window_factor = 2;
  struct Case {
    const char* file;
    const char* cls;
    int seeds;
    bool flagged;
  };
  for (const Case& k : {Case{"escape.json", "(1)", 64, true}, Case{"scaling.json", "(1,0)", 16, false},
                        Case{"octagon_path.json", "a", 8, false}}) {
    const FamilySpec f = load_family(kData + "/" + k.file);
    const SkyReport base = sky_analysis(f, f.parse(k.cls), {}, seeds(k.seeds));
    const SkyReport wide = sky_analysis(f, f.parse(k.cls), doubled, seeds(k.seeds));
    c.require(base.flagged == k.flagged, std::string(k.file) + " verdict");
    c.require(wide.flagged == base.flagged, std::string(k.file) + " verdict under doubled ceilings");
    if (k.flagged) {
      bool escaped = false;
      for (const auto& b : base.branches) escaped = escaped || b.branch.end_reason == BranchStatus::EscapedWindow;
      c.require(escaped, std::string(k.file) + " EscapedWindow");
    }
    c.note(std::string(k.file) + ": " + base.verdict + " | doubled: " + wide.verdict);
  }
  const double t = clock.seconds();
  c.require(t < kSkyBudget, "time " + fmt("%.1f s", t));
}

void criterion_9(Criterion& c) {
  Clock clock;
  const FamilySpec oct = load_family(kData + "/octagon_path.json");
  const SpreadReport h = length_spread_criterion(oct, oct.parse("a"), 5, seeds(8));
  c.require(h.satisfied && h.sup == 0.0, "hyperbolic family spread");
  c.note("octagon path: " + h.verdict + " (sup " + fmt("%.1e", h.sup) + ")");

  const FamilySpec bump = load_family(kData + "/bump_amplitude.json");
  const SpreadReport b = length_spread_criterion(bump, bump.parse("(1,0)"), 5, seeds(16));
  const double oracle = horizontal_length(0.5, 0.01) - horizontal_length(0.0, 0.01);
  c.require(b.satisfied && b.sup < kBumpSpreadBound, "bump family bounded");
  c.require(std::abs(b.spread.back() - oracle) < kSpreadOracleTol, "bump spread at t = 1 against quadrature");
  c.note("bump amplitude: " + b.verdict + " (sup " + fmt("%.6f", b.sup) + ", quadrature " + fmt("%.6f", oracle) + ")");

  const FamilySpec adv = load_family(kData + "/adversarial.json");
  const SpreadReport a = length_spread_criterion(adv, adv.parse("(1)"), 6, seeds(32));
  c.require(!a.satisfied, "adversarial family violates the criterion");
  std::string counts;
  for (int n : a.strings) counts += " " + std::to_string(n);
  c.note("adversarial: " + a.verdict + " (strings per sample:" + counts + ")");
  const double t = clock.seconds();
  c.require(t < kSpreadBudget, "time " + fmt("%.1f s", t));
}

void criterion_10(Criterion& c) {
  struct Shipped {
    std::string name;
    MetricSpec metric;
    ModelSpace model;
    std::string cls;
  };
  const ModelSpace oct = octagon();
  const ModelFile bump = load_model(kData + "/torus_bump.json");
  const ModelFile cyl = load_model(kData + "/cosh_cylinder.json");
  const std::vector<Shipped> cases = {
      {"octagon a", standard_metric(oct), oct, "a"},
      {"octagon aa", standard_metric(oct), oct, "aa"},
      {"octagon aaa", standard_metric(oct), oct, "aaa"},
      {"octagon ab'", standard_metric(oct), oct, "ab'"},
      {"bump torus (1,0)", bump.metric(), bump.model, "(1,0)"},
      {"cosh waist (1)", cyl.metric(), cyl.model, "(1)"},
  };
  double worst = 0;
  int strings = 0;
  for (const auto& s : cases) {
    for (const GeodesicString& g : geodesic_strings(s.metric, s.model, parse_class(s.cls, s.model), seeds(16))) {
      const GeodesicString fine = refine_string(g, s.metric, s.model);
      const double rel = std::abs(fine.length - g.length) / g.length;
      worst = std::max(worst, rel);
      ++strings;
      c.require(rel < kRefineRel, s.name + " length change " + fmt("%.1e", rel));
      c.require(fine.morse_index == g.morse_index, s.name + " Morse index");
    }
  }
  c.note(std::to_string(strings) + " strings, N 256 -> 512, max relative length change " + fmt("%.1e", worst));
}

}  // namespace

int main() {
  run(1, "F = 1/n on the genus-2 octagon surface", criterion_1);
  run(2, "every rational is realized", criterion_2);
  run(3, "Fuller sum equals the Morse count", criterion_3);
  run(4, "product formula", criterion_4);
  run(5, "basic invariance along families", criterion_5);
  run(6, "monodromy accuracy", criterion_6);
  run(7, "index oracle equivalence", criterion_7);
  run(8, "sky-catastrophe detector", criterion_8);
  run(9, "length-spread criterion", criterion_9);
  run(10, "convergence under refinement", criterion_10);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
