#include "fuller/invariant.hpp"

#include <deque>
#include <numeric>
#include <random>
#include <set>

#include <json.hpp>

namespace fuller {

std::string to_string(Route r) {
  switch (r) {
    case Route::FullerSum: return "FullerSum";
    case Route::MorseCount: return "MorseCount";
    case Route::ProductFormula: return "ProductFormula";
  }
  return "?";
}

bool InvariantReport::consistent() const {
  for (const auto& [route, value] : consistency)
    if (value != F) return false;
  return true;
}

std::string report_json(const InvariantReport& r) {
  nlohmann::ordered_json j;
  j["F"] = to_string(r.F);
  j["route"] = to_string(r.route);
  j["class"] = to_string(r.cls);
  j["lifted_class"] = to_string(r.lifted);
  j["convention"] = r.convention;
  nlohmann::ordered_json led = nlohmann::ordered_json::array();
  for (const auto& e : r.ledger) {
    nlohmann::ordered_json x;
    x["label"] = e.label;
    x["length"] = e.length;
    if (e.index) x["index"] = *e.index;
    x["multiplicity"] = e.multiplicity;
    if (e.morse_index) x["morse_index"] = *e.morse_index;
    x["contribution"] = to_string(e.contribution);
    led.push_back(x);
  }
  j["ledger"] = led;
  nlohmann::ordered_json c = nlohmann::ordered_json::object();
  for (const auto& [route, value] : r.consistency) c[to_string(route)] = to_string(value);
  j["consistency"] = c;
  j["consistent"] = r.consistent();
  return j.dump(2);
}

namespace {

bool product_like(const ModelSpace& m) { return m.kind == ModelKind::Product || m.kind == ModelKind::MappingTorus; }

std::vector<GeodesicString> nondegenerate_strings(const MetricSpec& metric, const ModelSpace& model,
                                                  const FreeHomotopyClass& cls, const VariationalOptions& opt) {
  std::vector<GeodesicString> strings = geodesic_strings(metric, model, cls, opt);
  for (const auto& s : strings)
    if (s.degenerate_family)
      fail(ErrorKind::PerturbationRequired, "class " + to_string(cls) + " carries a Morse-Bott family of " +
                                                std::to_string(s.zero_modes) +
                                                " zero modes; add a bump to the metric and retry");
  return strings;
}

}  // namespace

MorseFunctionSpec default_morse_data(const ModelSpace& base) {
  if (base.kind == ModelKind::FlatTorus && base.dim == 1) return circle_height();
  if (base.kind == ModelKind::FuchsianSurface) return surface_height(base.group.genus);
  fail(ErrorKind::UnsupportedModel, "no default Morse data on " + base.describe());
}

InvariantReport F_invariant(const MetricSpec& metric, const ModelSpace& model, const FreeHomotopyClass& cls,
                            const VariationalOptions& opt) {
  InvariantReport rep;
  rep.cls = cls;
  rep.lifted = cls;
  rep.lifted.lifted = true;
  const IndexConvention conv = calibrated_convention();
  rep.convention = conv.id;

  if (product_like(model)) {
    ProductOptions po;
    po.full_ode = false;
    const ModelSpace base = model.kind == ModelKind::Product ? model.factors[1] : ModelSpace::circle();
    const ProductReport pr = verify_euler_product(model, cls, default_morse_data(base), po);
    rep.route = Route::ProductFormula;
    rep.F = pr.formula;
    for (const auto& t : pr.terms) {
      LedgerEntry e;
      e.label = "critical fiber " + t.label;
      e.morse_index = t.morse_index;
      e.contribution = (t.morse_index % 2 == 0 ? 1 : -1) * t.fiber_sum;
      rep.ledger.push_back(e);
    }
    rep.consistency.push_back({Route::ProductFormula, pr.structural});
    return rep;
  }

  const std::vector<GeodesicString> strings = nondegenerate_strings(metric, model, cls, opt);
  const GeodesicFlowField flow = geodesic_field(metric, model);
  std::vector<ClosedOrbitRecord> orbits;
  for (std::size_t k = 0; k < strings.size(); ++k) {
    GeodesicString s = strings[k];
    if (!s.morse_index) morse_index(s, metric, model);
    ClosedOrbitRecord rec = lift_to_unit_bundle(s, metric, model);
    if (!rec.index) rec.index = fixed_point_index(rec, conv, &flow.field);
    orbits.push_back(rec);
    LedgerEntry e;
    e.label = "string " + std::to_string(k);
    e.length = s.length;
    e.index = rec.index;
    e.multiplicity = rec.multiplicity;
    e.morse_index = s.morse_index;
    rep.ledger.push_back(e);
  }
  const FullerIndexResult fr = fuller_index(orbits, rep.lifted, conv);
  for (const auto& c : fr.contributions) rep.ledger[c.orbit].contribution = Rational(c.index, c.multiplicity);
  rep.F = fr.value;
  rep.route = Route::FullerSum;
  rep.consistency.push_back({Route::FullerSum, fr.value});
  if (power_decomposition(cls).n == 1) {
    int count = 0;
    for (const auto& s : strings) count += (*s.morse_index % 2 == 0) ? 1 : -1;
    rep.consistency.push_back({Route::MorseCount, Rational(count)});
  }
  return rep;
}

int euler_characteristic_route(const MetricSpec& metric, const ModelSpace& model, const FreeHomotopyClass& cls,
                               const VariationalOptions& opt) {
  const PowerDecomposition pd = power_decomposition(cls);
  if (pd.n > 1)
    fail(ErrorKind::ClassIsPower, to_string(cls) + " is the " + std::to_string(pd.n) + "-th power of " +
                                      to_string(pd.root) + "; the Morse count is not defined for powers");
  int count = 0;
  for (GeodesicString s : nondegenerate_strings(metric, model, cls, opt)) {
    const int m = s.morse_index ? *s.morse_index : morse_index(s, metric, model);
    count += (m % 2 == 0) ? 1 : -1;
  }
  return count;
}

// ---------------------------------------------------------------------------

void check_holonomy(const HolonomySpec& spec, int alphabet_size, int words, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (std::size_t g = 0; g < spec.generators.size(); ++g) {
    const ClassMap& m = spec.generators[g];
    if (!m.is_substitution()) {
      const Eigen::MatrixXi id = m.matrix * m.inverse_matrix;
      if (id != Eigen::MatrixXi::Identity(m.matrix.rows(), m.matrix.cols()))
        fail(ErrorKind::InvalidInput, "holonomy generator " + std::to_string(g) + " has no integral inverse");
      continue;
    }
    if (alphabet_size <= 0) fail(ErrorKind::InvalidInput, "substitution holonomy needs a word alphabet");
    std::uniform_int_distribution<int> letter(1, alphabet_size), len(1, 12), sgn(0, 1);
    for (int w = 0; w < words; ++w) {
      FreeHomotopyClass c;
      c.is_word = true;
      Word word;
      const int n = len(rng);
      for (int i = 0; i < n; ++i) word.push_back(sgn(rng) ? letter(rng) : -letter(rng));
      c.word = least_rotation(cyclic_reduce(word));
      if (c.word.empty()) continue;
      if (m.apply_inverse(m.apply(c)) != c || m.apply(m.apply_inverse(c)) != c)
        fail(ErrorKind::InvalidInput, "holonomy generator " + std::to_string(g) + " does not round-trip on " +
                                          to_string(c));
    }
  }
}

std::vector<FreeHomotopyClass> holonomy_orbit(const HolonomySpec& spec) {
  std::vector<FreeHomotopyClass> orbit{spec.base_class};
  std::set<std::string> seen{to_string(spec.base_class)};
  std::deque<FreeHomotopyClass> queue{spec.base_class};
  while (!queue.empty()) {
    const FreeHomotopyClass c = queue.front();
    queue.pop_front();
    for (const ClassMap& g : spec.generators) {
      for (const FreeHomotopyClass& next : {g.apply(c), g.apply_inverse(c)}) {
        if (!seen.insert(to_string(next)).second) continue;
        orbit.push_back(next);
        if (static_cast<int>(orbit.size()) > spec.orbit_bound)
          fail(ErrorKind::OrbitBoundExceeded, "holonomy orbit of " + to_string(spec.base_class) + " exceeds " +
                                                  std::to_string(spec.orbit_bound) + " classes; infinite suspected");
        queue.push_back(next);
      }
    }
  }
  return orbit;
}

int holonomy_orbit_card(const HolonomySpec& spec) { return static_cast<int>(holonomy_orbit(spec).size()); }

Rational product_formula(int chi_Y, int card, const Rational& F_fiber) {
  if (card < 1) fail(ErrorKind::InvalidInput, "holonomy orbit cardinality must be positive");
  return Rational(static_cast<std::int64_t>(card) * chi_Y) * F_fiber;
}

// ---------------------------------------------------------------------------

RationalRealization realize_rational(long p, long q, int sign) {
  if (p <= 0 || q <= 0) fail(ErrorKind::InvalidInput, "realize_rational needs p, q > 0");
  RationalRealization out;
  const ModelSpace Z = ModelSpace::fuchsian(regular_polygon_group(2));
  const long q_fiber = sign > 0 ? 2 * q : q;
  FreeHomotopyClass beta;
  beta.is_word = true;
  beta.word = Word(static_cast<std::size_t>(2 * q_fiber), 1);
  out.fiber_class = beta;
  out.fiber_value = F_invariant(standard_metric(Z), Z, beta).F;
  out.fiber_expected = Rational(1, 2 * q_fiber);
  const std::string cls_text = "class = (generator)^" + std::to_string(2 * q_fiber);
  out.stages.push_back("F(genus-2, " + cls_text.substr(8) + ") = " + to_string(out.fiber_value));

  if (sign == 0) {
    out.value = product_formula(euler_characteristic(ModelSpace::circle()), 1, out.fiber_value);
    out.expected = Rational(0);
    out.construction = "circle × genus-2, " + cls_text;
    out.stages.push_back("chi(circle) = 0");
  } else {
    const int genus = static_cast<int>(p) + 1;
    const int chi = euler_characteristic(ModelSpace::fuchsian(regular_polygon_group(genus)));
    const Rational stage = product_formula(chi, 1, out.fiber_value);
    out.stages.push_back("chi(genus-" + std::to_string(genus) + ") = " + std::to_string(chi) + ", stage value " +
                         to_string(stage));
    if (sign < 0) {
      out.value = stage;
      out.expected = Rational(-p, q);
      out.construction = "genus-" + std::to_string(genus) + " × genus-2, " + cls_text;
    } else {
      const int chi2 = euler_characteristic(Z);
      out.value = product_formula(chi2, 1, stage);
      out.expected = Rational(p, q);
      out.stages.push_back("chi(genus-2) = " + std::to_string(chi2) + ", value " + to_string(out.value));
      out.construction = "genus-2 × genus-" + std::to_string(genus) + " × genus-2, " + cls_text;
    }
  }
  out.pass = out.value == out.expected && out.fiber_value == out.fiber_expected;
  return out;
}

// ---------------------------------------------------------------------------

namespace {

struct FlatProduct {
  Mat G, Ginv;
  int n0 = 0, n = 0;
};

FlatProduct flat_product(const MetricSpec& metric, const ModelSpace& model) {
  if (model.kind != ModelKind::Product || model.factors[0].kind != ModelKind::FlatTorus ||
      model.factors[1].kind != ModelKind::FlatTorus || !metric.bumps.empty() ||
      metric.kind != MetricKind::Riemannian)
    fail(ErrorKind::UnsupportedModel, "the perturbed product flow is implemented for flat products only");
  FlatProduct fp;
  fp.n = model.dim;
  fp.n0 = model.factors[0].dim;
  fp.G = metric.tensor<double>(Vec::Zero(fp.n));
  fp.Ginv = fp.G.inverse();
  return fp;
}

double vertical_P(const FlatProduct& fp, const Vec& z) {
  const Vec vz = z.segment(fp.n, fp.n0);
  return vz.dot(fp.G.topLeftCorner(fp.n0, fp.n0) * vz);
}

}  // namespace

VectorFieldSpec perturbed_product_flow(const MetricSpec& metric, const ModelSpace& model, const MorseFunctionSpec& f,
                                       double t) {
  if (!f.has_function() || !f.gradient)
    fail(ErrorKind::UnsupportedModel, "the perturbed product flow needs the Morse function itself, not only its "
                                      "critical points");
  const FlatProduct fp = flat_product(metric, model);
  const GeodesicFlowField flow = geodesic_field(metric, model);
  if (t == 0.0) return flow.field;
  const int n = fp.n, n0 = fp.n0;
  auto grad = [fp, f, n, n0](const Vec& z) {
    Vec out = Vec::Zero(2 * n);
    Vec dx = Vec::Zero(n);
    dx.tail(n - n0) = f.gradient(Vec(z.segment(n0, n - n0)));
    out.head(n) = fp.Ginv * dx;
    const Vec v = z.tail(n);
    Vec vz = Vec::Zero(n);
    vz.head(n0) = v.head(n0);
    const double P = vertical_P(fp, z);
    const double vv = v.dot(fp.G * v);
    out.tail(n) = 2.0 * (vz - (P / vv) * v);
    return out;
  };
  VectorFieldSpec field = flow.field;
  const VectorFieldSpec base = flow.field;
  field.eval = [base, grad, t](const Vec& z) { return Vec(base.eval(z) - t * grad(z)); };
  field.jacobian = [base, grad, t](const Vec& z) {
    return Mat(base.jacobian_at(z) - t * finite_difference_jacobian(grad, z));
  };
  return field;
}

double vertical_energy_increase(const VectorFieldSpec& field, const MetricSpec& metric, const ModelSpace& model,
                                int samples, double T, std::uint64_t seed) {
  const FlatProduct fp = flat_product(metric, model);
  const GeodesicFlowField flow = geodesic_field(metric, model);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    const Vec x = sample_point(model, rng);
    Vec dir(fp.n);
    for (int i = 0; i < fp.n; ++i) dir(i) = nd(rng);
    const Vec z0 = flow.unit_phase_point(x, dir);
    IntegratorOptions io;
    io.tol = 1e-12;
    StepStats st;
    integrate_adaptive(field, z0, 0.0, T, io, st, [&](double, const Vec& a, double, const Vec& b) {
      worst = std::max(worst, vertical_P(fp, b) - vertical_P(fp, a));
      return true;
    });
  }
  return worst;
}

// ---------------------------------------------------------------------------

namespace {

FreeHomotopyClass fiber_part(const ModelSpace& model, const ModelSpace& fiber, const FreeHomotopyClass& cls) {
  if (cls.is_word) return cls;
  const auto n0 = static_cast<std::size_t>(fiber.lattice_dim());
  if (cls.lattice.size() < n0) fail(ErrorKind::InvalidInput, "class has too few lattice components");
  for (std::size_t i = n0; i < cls.lattice.size(); ++i)
    if (cls.lattice[i] != 0) fail(ErrorKind::InvalidInput, to_string(cls) + " does not lie in the fiber");
  FreeHomotopyClass c = cls;
  c.lattice.resize(n0);
  (void)model;
  return c;
}

// Product metrics: block-diagonal, each block independent of the other
// factor's coordinates.  Fibers are then totally geodesic and the
// horizontal distribution parallel.
double submersion_defect(const ModelSpace& model, int samples) {
  const MetricSpec metric = standard_metric(model);
  const int n0 = model.factors[0].dim, n = model.dim;
  std::mt19937_64 rng(5);
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    const MetricJet jet = metric_jet(metric, sample_point(model, rng), 1);
    worst = std::max(worst, jet.g.topRightCorner(n0, n - n0).cwiseAbs().maxCoeff());
    for (int k = 0; k < n; ++k) {
      const Mat& d = jet.dg[static_cast<std::size_t>(k)];
      if (k >= n0) worst = std::max(worst, d.topLeftCorner(n0, n0).cwiseAbs().maxCoeff());
      if (k < n0) worst = std::max(worst, d.bottomRightCorner(n - n0, n - n0).cwiseAbs().maxCoeff());
      worst = std::max(worst, d.topRightCorner(n0, n - n0).cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

// Trace spectrum of the fiber group is preserved by the holonomy.
double isometry_defect(const ModelSpace& fiber, const ClassMap& hol) {
  if (fiber.kind != ModelKind::FuchsianSurface || !hol.is_substitution()) return 0.0;
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> letter(1, fiber.alphabet_size()), len(1, 6), sgn(0, 1);
  double worst = 0.0;
  for (int w = 0; w < 100; ++w) {
    FreeHomotopyClass c;
    c.is_word = true;
    Word word;
    const int n = len(rng);
    for (int i = 0; i < n; ++i) word.push_back(sgn(rng) ? letter(rng) : -letter(rng));
    c.word = least_rotation(cyclic_reduce(word));
    if (c.word.empty()) continue;
    const double t0 = std::abs(fiber.group.element(c.word).trace());
    const double t1 = std::abs(fiber.group.element(hol.apply(c).word).trace());
    worst = std::max(worst, std::abs(t0 - t1) / std::max(1.0, t0));
  }
  return worst;
}

std::optional<Rational> full_ode_count(const ModelSpace& model, const FreeHomotopyClass& cls,
                                       const MorseFunctionSpec& f, const ProductOptions& opt, ProductReport& rep) {
  const MetricSpec metric = standard_metric(model);
  const VectorFieldSpec field = perturbed_product_flow(metric, model, f, opt.t);
  const GeodesicFlowField flow = geodesic_field(metric, model);
  const int n = model.dim;
  const ClassDeck deck = class_deck(model, cls);
  Vec shift = Vec::Zero(2 * n);
  shift.head(n) = deck.shift;
  const double period = std::sqrt(deck.shift.dot(metric.tensor<double>(Vec::Zero(n)) * deck.shift));
  std::vector<ClosedOrbitRecord> found;
  for (int j = 0; j < opt.seed_grid; ++j) {
    Vec x = Vec::Zero(n);
    x(n - 1) = (j + 0.3) / opt.seed_grid;
    const Vec z0 = flow.unit_phase_point(x, deck.shift);
    OrbitSearchOptions so;
    so.closure = Closure::lattice(shift);
    so.period_guess = period;
    try {
      ClosedOrbitRecord rec = find_closed_orbit(field, z0, Section{z0, field.eval(z0)}, so);
      rec.cls = cls;
      rec.cls.lifted = true;
      found.push_back(rec);
    } catch (const Error&) {
    }
  }
  rep.ode_orbits = s1_dedupe(found, field.periodic);
  rep.vertical_increase = vertical_energy_increase(field, metric, model);
  FreeHomotopyClass lifted = cls;
  lifted.lifted = true;
  return fuller_index(rep.ode_orbits, lifted).value;
}

}  // namespace

ProductReport verify_euler_product(const ModelSpace& model, const FreeHomotopyClass& cls, const MorseFunctionSpec& f,
                                   const ProductOptions& opt) {
  if (!product_like(model)) fail(ErrorKind::InvalidInput, "verify_euler_product needs a product or mapping torus");
  ProductReport rep;
  const ModelSpace& Z = model.factors[0];
  const ModelSpace Y = model.kind == ModelKind::Product ? model.factors[1] : ModelSpace::circle();
  rep.fiber_class = fiber_part(model, Z, cls);
  if (!is_boundary_incompressible(rep.fiber_class, Z))
    fail(ErrorKind::InvalidInput, "fiber class " + to_string(rep.fiber_class) + " is not boundary incompressible");
  check_morse_data(f, Y);
  rep.chi = euler_characteristic(Y);

  HolonomySpec hs;
  hs.base_class = rep.fiber_class;
  if (model.kind == ModelKind::MappingTorus) {
    hs.generators.push_back(model.holonomy);
    check_holonomy(hs, Z.alphabet_size());
    const double iso = isometry_defect(Z, model.holonomy);
    rep.notes.push_back("holonomy isometric by construction; trace spectrum defect " + std::to_string(iso));
    if (iso > 1e-8) fail(ErrorKind::UnsupportedModel, "holonomy does not preserve the fiber trace spectrum");
  } else {
    rep.condition_defect = submersion_defect(model, 50);
    rep.notes.push_back("product metric: fibers totally geodesic, horizontal distribution parallel (sampled)");
  }
  rep.orbit = holonomy_orbit(hs);
  rep.card = static_cast<int>(rep.orbit.size());

  const MetricSpec gz = standard_metric(Z);
  Rational orbit_sum(0);
  for (std::size_t k = 0; k < rep.orbit.size(); ++k) {
    const Rational v = F_invariant(gz, Z, rep.orbit[k]).F;
    if (k == 0) rep.F_fiber = v;
    orbit_sum += v;
  }
  for (const auto& c : f.critical_points) {
    rep.terms.push_back({c.label, c.morse_index, orbit_sum});
    rep.structural += (c.morse_index % 2 == 0 ? 1 : -1) * orbit_sum;
  }
  rep.formula = product_formula(rep.chi, rep.card, rep.F_fiber);

  const bool two_circles = model.kind == ModelKind::Product && Z.kind == ModelKind::FlatTorus &&
                           Y.kind == ModelKind::FlatTorus && Z.dim == 1 && Y.dim == 1;
  if (opt.full_ode && two_circles && f.has_function()) rep.full_ode = full_ode_count(model, cls, f, opt, rep);

  rep.pass = rep.structural == rep.formula && (!rep.full_ode || *rep.full_ode == rep.formula) &&
             rep.condition_defect < 1e-10 && rep.vertical_increase < 1e-8;
  return rep;
}

std::string product_json(const ProductReport& r) {
  nlohmann::ordered_json j;
  j["structural"] = to_string(r.structural);
  j["formula"] = to_string(r.formula);
  if (r.full_ode) j["full_ode"] = to_string(*r.full_ode);
  j["card"] = r.card;
  j["chi"] = r.chi;
  j["F_fiber"] = to_string(r.F_fiber);
  j["fiber_class"] = to_string(r.fiber_class);
  nlohmann::ordered_json orb = nlohmann::ordered_json::array();
  for (const auto& c : r.orbit) orb.push_back(to_string(c));
  j["holonomy_orbit"] = orb;
  nlohmann::ordered_json terms = nlohmann::ordered_json::array();
  for (const auto& t : r.terms)
    terms.push_back({{"critical_point", t.label}, {"morse_index", t.morse_index}, {"fiber_sum", to_string(t.fiber_sum)}});
  j["terms"] = terms;
  if (r.full_ode) {
    nlohmann::ordered_json orbits = nlohmann::ordered_json::array();
    for (const auto& o : r.ode_orbits)
      orbits.push_back({{"start", std::vector<double>(o.start.data(), o.start.data() + o.start.size())},
                        {"period", o.period},
                        {"index", o.index ? nlohmann::ordered_json(*o.index) : nlohmann::ordered_json("degenerate")}});
    j["ode_orbits"] = orbits;
    j["vertical_increase"] = r.vertical_increase;
  }
  j["condition_defect"] = r.condition_defect;
  j["notes"] = r.notes;
  j["pass"] = r.pass;
  return j.dump(2);
}

}  // namespace fuller
