#include "fuller/geodesics.hpp"

#include <complex>
#include <numbers>
#include <random>
#include <sstream>

#include <json.hpp>

namespace fuller {

std::string to_string(Backend b) { return b == Backend::Algebraic ? "algebraic" : "variational"; }

namespace {

// t -> g^t for a hyperbolic element, as a Moebius map.
struct HyperbolicPower {
  Eigen::Matrix2d v, vinv;
  double log_lambda = 0.0;

  explicit HyperbolicPower(Eigen::Matrix2d g) {
    if (g.trace() < 0) g = -g;
    const double tr = g.trace();
    if (!(tr > 2.0)) fail(ErrorKind::NotHyperbolicElement, "trace " + std::to_string(tr) + " is not hyperbolic");
    const double s = std::sqrt(tr * tr - 4.0);
    const double l1 = (tr + s) / 2, l2 = (tr - s) / 2;
    auto eigvec = [&](double l) {
      Eigen::Vector2d e(g(0, 1), l - g(0, 0));
      if (e.norm() < 1e-12) e = Eigen::Vector2d(l - g(1, 1), g(1, 0));
      return Eigen::Vector2d(e.normalized());
    };
    v.col(0) = eigvec(l1);
    v.col(1) = eigvec(l2);
    vinv = v.inverse();
    log_lambda = std::log(l1);
  }

  Eigen::Matrix2d at(double t) const {
    Eigen::Matrix2d d = Eigen::Matrix2d::Zero();
    d(0, 0) = std::exp(t * log_lambda);
    d(1, 1) = std::exp(-t * log_lambda);
    return v * d * vinv;
  }
};

Vec mobius_point(const Eigen::Matrix2d& m, const Vec& x) {
  const std::complex<double> z(x(0), x(1));
  const std::complex<double> w = (m(0, 0) * z + m(0, 1)) / (m(1, 0) * z + m(1, 1));
  Vec out(2);
  out << w.real(), w.imag();
  return out;
}

// A point on the axis of g: the top of its semicircle, or height 1 on a vertical axis.
Vec axis_point(const Eigen::Matrix2d& g) {
  const double a = g(0, 0), b = g(0, 1), c = g(1, 0), d = g(1, 1);
  Vec x(2);
  if (std::abs(c) < 1e-14) {
    x << b / (d - a), 1.0;
    return x;
  }
  const double disc = std::sqrt((d - a) * (d - a) + 4 * b * c);
  const double p = (-(d - a) + disc) / (2 * c), q = (-(d - a) - disc) / (2 * c);
  x << (p + q) / 2, std::abs(p - q) / 2;
  return x;
}

ModelSpace fuchsian_model_of(const FuchsianGroup& g) { return ModelSpace::fuchsian(g); }

void fill_invariants(GeodesicString& s, const MetricSpec& metric) {
  const EnergyDerivatives ed = energy_derivatives(metric, s.loop, false);
  s.energy = ed.value;
  // dual norm of the per-node gradient
  const int d = s.loop.dim();
  s.residual = 0.0;
  for (int k = 0; k < s.loop.size(); ++k) {
    const Vec gk = ed.gradient.segment(k * d, d);
    const double r = metric.kind == MetricKind::Riemannian
                         ? std::sqrt(gk.dot(metric.tensor<double>(s.loop.nodes[static_cast<std::size_t>(k)]).ldlt().solve(gk)))
                         : gk.norm();
    s.residual = std::max(s.residual, r);
  }
  s.length = loop_length(metric, s.loop);
  s.speed_spread = speed_spread(metric, s.loop);
}

// Smooth periodic perturbation with a few Fourier modes.
Vec smooth_noise(int k, int n, int d, const std::vector<double>& coeffs) {
  Vec out = Vec::Zero(d);
  const double th = 2 * std::numbers::pi * k / n;
  for (int i = 0; i < d; ++i)
    for (int m = 1; m <= 3; ++m) {
      const auto base = static_cast<std::size_t>((i * 3 + (m - 1)) * 2);
      out(i) += coeffs[base] * std::sin(m * th) + coeffs[base + 1] * std::cos(m * th);
    }
  return out;
}

DiscreteLoop seed_loop(const ModelSpace& model, const FreeHomotopyClass& cls, const ClassDeck& deck, int n, int j,
                       int n_seeds, double noise, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  const int d = model.dim;
  std::vector<double> coeffs(static_cast<std::size_t>(d * 6));
  for (double& c : coeffs) c = noise * unif(rng) / 3.0;
  const double frac = (j + 0.5) / n_seeds;
  DiscreteLoop loop;
  loop.deck = deck;
  loop.cls = cls;
  switch (model.kind) {
    case ModelKind::FlatTorus:
    case ModelKind::Product: {
      if (!model.lattice_classes() || model.kind == ModelKind::Product) {
        for (const auto& f : model.factors)
          if (f.kind != ModelKind::FlatTorus) fail(ErrorKind::UnsupportedModel, "variational seeds on " + model.describe());
      }
      Vec w(d);
      for (int i = 0; i < d; ++i) w(i) = static_cast<double>(cls.lattice.at(static_cast<std::size_t>(i)));
      Eigen::Index across = 0;
      w.cwiseAbs().minCoeff(&across);
      Vec x0 = Vec::Zero(d);
      for (int i = 0; i < d; ++i) x0(i) = 0.5 * (unif(rng) + 1.0);
      x0(across) = frac;
      for (int k = 0; k < n; ++k) loop.nodes.push_back(Vec(x0 + w * (static_cast<double>(k) / n) + smooth_noise(k, n, d, coeffs)));
      return loop;
    }
    case ModelKind::WarpedCylinder: {
      const double r0 = -model.window + 2 * model.window * frac;
      const double th0 = std::numbers::pi * (unif(rng) + 1.0);
      const double wind = 2 * std::numbers::pi * static_cast<double>(cls.lattice.at(0));
      for (int k = 0; k < n; ++k) {
        Vec x(2);
        x << r0, th0 + wind * k / n;
        loop.nodes.push_back(Vec(x + smooth_noise(k, n, d, coeffs)));
      }
      return loop;
    }
    case ModelKind::FuchsianSurface: {
      const Eigen::Matrix2d g = deck.mobius;
      const HyperbolicPower hp(g);
      Vec x0 = axis_point(g);
      x0(1) *= std::exp(0.6 * (frac - 0.5));
      for (int k = 0; k < n; ++k) {
        Vec x = mobius_point(hp.at(static_cast<double>(k) / n), x0);
        Vec dx = smooth_noise(k, n, d, coeffs) * x(1);
        loop.nodes.push_back(Vec(x + dx));
      }
      return loop;
    }
    case ModelKind::MappingTorus: break;
  }
  fail(ErrorKind::UnsupportedModel, "variational seeds on " + model.describe());
}

// Coordinate difference reduced on periodic coordinates.
Vec reduced(Vec d, const std::vector<PeriodicCoord>& periodic) {
  for (const auto& p : periodic) d(p.index) -= p.period * std::round(d(p.index) / p.period);
  return d;
}

double point_segment(const Vec& p, const Vec& a, const Vec& b, const std::vector<PeriodicCoord>& periodic) {
  const Vec ap = reduced(p - a, periodic);
  const Vec ab = b - a;
  const double t = std::clamp(ap.dot(ab) / std::max(ab.squaredNorm(), 1e-300), 0.0, 1.0);
  return (ap - t * ab).norm();
}

// max over nodes of a of the distance to the polyline of b, extended one period both ways
double polyline_distance(const DiscreteLoop& a, const DiscreteLoop& b, const std::vector<PeriodicCoord>& periodic) {
  const int nb = b.size();
  std::vector<Vec> pts;
  for (int k = -nb; k <= 2 * nb; ++k) pts.push_back(b.node(k));
  double worst = 0.0;
  for (const Vec& p : a.nodes) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) best = std::min(best, point_segment(p, pts[i], pts[i + 1], periodic));
    worst = std::max(worst, best);
  }
  return worst;
}

bool same_string(const GeodesicString& a, const GeodesicString& b, const std::vector<PeriodicCoord>& periodic) {
  if (std::abs(a.length - b.length) > 1e-6 * std::max(a.length, b.length)) return false;
  double scale = 1.0;
  for (const Vec& x : a.loop.nodes) scale = std::max(scale, x.cwiseAbs().maxCoeff());
  return polyline_distance(a.loop, b.loop, periodic) < 1e-3 * scale;
}

bool inside_window(const ModelSpace& model, const DiscreteLoop& loop) {
  if (model.kind != ModelKind::WarpedCylinder) return true;
  for (const Vec& x : loop.nodes)
    if (std::abs(x(0)) > model.window) return false;
  return true;
}

}  // namespace

GeodesicString hyperbolic_closed_geodesic(const FuchsianGroup& group, const FreeHomotopyClass& cls, int nodes) {
  if (!cls.is_word || cls.constant()) fail(ErrorKind::InvalidInput, "hyperbolic geodesics need a nonconstant word class");
  const Eigen::Matrix2d g = group.element(cls.word);
  const HyperbolicPower hp(g);
  GeodesicString s;
  s.backend = Backend::Algebraic;
  s.cls = cls;
  s.multiplicity = power_decomposition(cls).n;
  s.loop.cls = cls;
  s.loop.deck = ClassDeck::identity(2);
  s.loop.deck.has_mobius = true;
  s.loop.deck.mobius = g;
  const Vec x0 = axis_point(g);
  for (int k = 0; k < nodes; ++k) s.loop.nodes.push_back(mobius_point(hp.at(static_cast<double>(k) / nodes), x0));
  const ModelSpace model = fuchsian_model_of(group);
  fill_invariants(s, standard_metric(model));
  s.length = translation_length(g);
  s.morse_index = 0;
  s.zero_modes = 1;
  return s;
}

int morse_index(GeodesicString& string, const MetricSpec& metric, const ModelSpace& model) {
  (void)model;
  const HessianSpectrum hs = hessian_spectrum(metric, string.loop);
  string.zero_modes = hs.zero_modes;
  if (hs.zero_modes >= 2) {
    string.degenerate_family = true;
    string.morse_index.reset();
    return hs.negative;
  }
  // the S^1 mode is the eigenvalue of least magnitude
  std::vector<double> mags;
  Eigen::Index zi = 0;
  hs.eigenvalues.cwiseAbs().minCoeff(&zi);
  for (int i = 0; i < hs.eigenvalues.size(); ++i)
    if (i != zi) mags.push_back(std::abs(hs.eigenvalues(i)));
  const double zero = std::abs(hs.eigenvalues(zi));
  const double next = *std::min_element(mags.begin(), mags.end());
  if (!(next >= 100.0 * zero))
    fail(ErrorKind::SpectralGapTooSmall, "zero mode " + std::to_string(zero) + " vs next eigenvalue " +
                                             std::to_string(next));
  int neg = 0;
  for (int i = 0; i < hs.eigenvalues.size(); ++i)
    if (i != zi && hs.eigenvalues(i) < 0) ++neg;
  string.zero_modes = 1;
  string.degenerate_family = false;
  string.morse_index = neg;
  return neg;
}

GeodesicString refine_string(const GeodesicString& string, const MetricSpec& metric, const ModelSpace& model,
                             double tol) {
  GeodesicString s = string;
  if (string.backend == Backend::Algebraic && model.kind == ModelKind::FuchsianSurface)
    s.loop = hyperbolic_closed_geodesic(model.group, string.cls, 2 * string.loop.size()).loop;
  else
    s.loop = refine(string.loop);
  const NewtonOutcome nr = newton_refine(metric, s.loop, tol);
  if (!nr.converged)
    fail(ErrorKind::NoConvergence, "refined loop did not re-converge (residual " + std::to_string(nr.residual) + ")");
  fill_invariants(s, metric);
  if (string.backend == Backend::Algebraic && model.kind == ModelKind::FuchsianSurface)
    s.length = translation_length(string.loop.deck.mobius) * metric.scale;
  if (!string.degenerate_family) morse_index(s, metric, model);
  return s;
}

VariationalResult variational_closed_geodesics(const MetricSpec& metric, const ModelSpace& model,
                                               const FreeHomotopyClass& cls, const VariationalOptions& opt) {
  if (cls.constant()) fail(ErrorKind::ConstantClass, "variational search needs a nonconstant class");
  if (!model.compact() && model.kind != ModelKind::WarpedCylinder)
    fail(ErrorKind::UnsupportedModel, "variational search on " + model.describe());
  const ClassDeck deck = class_deck(model, cls);
  const auto periodic = periodic_coords(model);
  std::mt19937_64 rng(opt.seed);
  VariationalResult res;
  std::vector<GeodesicString> coarse;
  for (int j = 0; j < opt.n_seeds; ++j) {
    DiscreteLoop loop = seed_loop(model, cls, deck, opt.coarse_nodes, j, opt.n_seeds, opt.noise, rng);
    try {
      const DescentTrace tr = descend(metric, loop, opt.descent_steps);
      if (!tr.monotone) res.descent_monotone = false;
      const NewtonOutcome nr = newton_refine(metric, loop, opt.tol);
      if (!nr.converged) {
        res.failures.push_back({j, "NoConvergence: residual " + std::to_string(nr.residual)});
        continue;
      }
      if (!inside_window(model, loop)) {
        res.failures.push_back({j, "NoConvergence: left the search window"});
        continue;
      }
    } catch (const Error& e) {
      res.failures.push_back({j, std::string("NoConvergence: ") + e.what()});
      continue;
    }
    ++res.converged_seeds;
    GeodesicString s;
    s.backend = Backend::Variational;
    s.cls = cls;
    s.loop = loop;
    s.multiplicity = power_decomposition(cls).n;
    fill_invariants(s, metric);
    bool seen = false;
    for (const auto& c : coarse)
      if (same_string(c, s, periodic)) {
        seen = true;
        break;
      }
    if (!seen) coarse.push_back(std::move(s));
  }
  if (coarse.empty()) fail(ErrorKind::AllSeedsFailed, "no seed converged in class " + to_string(cls));

  // Morse-Bott families show up already on the coarse loops
  GeodesicString probe = coarse.front();
  const HessianSpectrum hs = hessian_spectrum(metric, probe.loop);
  if (hs.zero_modes >= 2) {
    for (auto& s : coarse) {
      s.degenerate_family = true;
      s.zero_modes = hs.zero_modes;
    }
    res.strings = std::move(coarse);
    return res;
  }

  for (auto& s : coarse) {
    GeodesicString f = s;
    try {
      while (f.loop.size() < opt.nodes) {
        f.loop = refine(f.loop);
        const NewtonOutcome nr = newton_refine(metric, f.loop, opt.tol);
        if (!nr.converged) fail(ErrorKind::NoConvergence, "residual " + std::to_string(nr.residual));
      }
      fill_invariants(f, metric);
      morse_index(f, metric, model);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::SpectralGapTooSmall) throw;
      res.failures.push_back({-1, std::string("refinement: ") + e.what()});
      continue;
    }
    bool seen = false;
    for (const auto& r : res.strings)
      if (same_string(r, f, periodic)) {
        seen = true;
        break;
      }
    if (!seen) res.strings.push_back(std::move(f));
  }
  if (res.strings.empty()) fail(ErrorKind::AllSeedsFailed, "no string survived refinement in class " + to_string(cls));
  std::sort(res.strings.begin(), res.strings.end(),
            [](const GeodesicString& a, const GeodesicString& b) { return a.length < b.length; });
  return res;
}

namespace {

// The primitive string under an n-fold covered one, when it can be read off.
std::optional<GeodesicString> root_string(const GeodesicString& s, const PowerDecomposition& pd,
                                          const MetricSpec& metric, const ModelSpace& model) {
  if (s.backend == Backend::Algebraic && model.kind == ModelKind::FuchsianSurface) {
    GeodesicString r = hyperbolic_closed_geodesic(model.group, pd.root, std::max(16, s.loop.size() / pd.n));
    r.length = s.length / pd.n;
    return r;
  }
  const int nn = s.loop.size();
  if (nn % pd.n != 0) return std::nullopt;
  GeodesicString r = s;
  r.cls = pd.root;
  r.loop.cls = pd.root;
  r.loop.deck = class_deck(model, pd.root);
  r.loop.nodes.assign(s.loop.nodes.begin(), s.loop.nodes.begin() + nn / pd.n);
  const Vec next = s.loop.node(nn / pd.n);
  const Vec pred = r.loop.deck.apply<double>(r.loop.nodes.front());
  if ((next - pred).cwiseAbs().maxCoeff() > 1e-6 * std::max(1.0, next.cwiseAbs().maxCoeff())) return std::nullopt;
  r.length = loop_length(metric, r.loop);
  r.multiplicity = 1;
  return r;
}

}  // namespace

ClosedOrbitRecord lift_to_unit_bundle(const GeodesicString& string, const MetricSpec& metric, const ModelSpace& model) {
  // shooting across a long covered period is ill-conditioned; lift the root and cover it
  if (!string.cls.constant()) {
    const PowerDecomposition pd = power_decomposition(string.cls);
    if (pd.n > 1) {
      if (auto root = root_string(string, pd, metric, model)) {
        ClosedOrbitRecord c = cover(lift_to_unit_bundle(*root, metric, model), pd.n, calibrated_convention());
        c.cls = string.cls;
        c.cls.lifted = true;
        return c;
      }
    }
  }
  const GeodesicFlowField flow = geodesic_field(metric, model);
  const DiscreteLoop& loop = string.loop;
  const int n = loop.dim();
  const int nn = loop.size();
  const Vec x0 = loop.nodes.front();
  const Vec dir = (loop.node(1) - loop.node(-1)) * (nn / 2.0);
  const Vec z0 = flow.unit_phase_point(x0, dir);
  OrbitSearchOptions opt;
  if (loop.deck.has_mobius) {
    opt.closure = Closure::geodesic(loop.deck, 2 * n);
  } else {
    Vec shift = Vec::Zero(2 * n);
    shift.head(n) = loop.deck.shift;
    opt.closure = Closure::lattice(shift);
  }
  opt.period_guess = string.length;
  const Section sec{z0, flow.field.eval(z0)};
  ClosedOrbitRecord rec = find_closed_orbit(flow.field, z0, sec, opt);
  rec.cls = string.cls;
  rec.cls.lifted = true;
  if (loop.deck.has_mobius) {
    const PowerDecomposition pd = power_decomposition(string.cls);
    rec.closure.root_deck = class_deck(model, pd.root);
    rec.closure.root_power = pd.n;
  }
  rec.multiplicity = multiplicity(rec);
  return rec;
}

std::vector<GeodesicString> geodesic_strings(const MetricSpec& metric, const ModelSpace& model,
                                             const FreeHomotopyClass& cls, const VariationalOptions& opt) {
  if (!is_boundary_incompressible(cls, model))
    fail(ErrorKind::InvalidInput, "class " + to_string(cls) + " is not boundary incompressible");
  if (model.kind == ModelKind::FuchsianSurface && metric.bumps.empty() && metric.kind == MetricKind::Riemannian) {
    GeodesicString s = hyperbolic_closed_geodesic(model.group, cls, opt.nodes);
    if (metric.scale != 1.0) {
      fill_invariants(s, metric);
      s.length = translation_length(s.loop.deck.mobius) * metric.scale;
    }
    return {s};
  }
  return variational_closed_geodesics(metric, model, cls, opt).strings;
}

TautnessReport tautness_certificate(const MetricSpec& metric, const ModelSpace& model, const FreeHomotopyClass& cls,
                                    int search_budget) {
  TautnessReport rep;
  VariationalOptions opt;
  opt.n_seeds = search_budget;
  VariationalResult vr = variational_closed_geodesics(metric, model, cls, opt);
  rep.all_seeds_converged = vr.failures.empty();
  rep.strings = geodesic_strings(metric, model, cls, opt);
  for (const auto& s : vr.strings) rep.family_detected = rep.family_detected || s.degenerate_family;
  if (model.kind == ModelKind::FuchsianSurface) {
    // every converged seed must land on the algebraic string
    for (const auto& s : vr.strings)
      if (std::abs(s.length - rep.strings.front().length) > 1e-6 * s.length) rep.all_seeds_converged = false;
  }
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const auto& s : rep.strings) {
    lo = std::min(lo, s.length);
    hi = std::max(hi, s.length);
  }
  rep.length_spread = rep.family_detected ? 0.0 : hi - lo;
  rep.verdict = rep.family_detected ? "family-detected" : "consistent-with-taut";
  if (model.kind == ModelKind::WarpedCylinder) {
    std::ostringstream w;
    w << "|r| <= " << model.window;
    rep.window = w.str();
  }
  rep.note = "heuristic: a finite seed search cannot prove compactness of the string space";
  return rep;
}

std::string string_json(const GeodesicString& s) {
  nlohmann::ordered_json j;
  j["length"] = s.length;
  j["class"] = to_string(s.cls);
  if (s.morse_index)
    j["morse_index"] = *s.morse_index;
  else
    j["morse_index"] = s.degenerate_family ? "degenerate-family" : "unknown";
  j["backend"] = to_string(s.backend);
  j["nodes"] = s.loop.size();
  j["multiplicity"] = s.multiplicity;
  return j.dump();
}

std::string string_csv(const GeodesicString& s) {
  std::ostringstream out;
  out.precision(17);
  out << "# " << string_json(s) << "\n";
  out << "k";
  for (int i = 0; i < s.loop.dim(); ++i) out << ",x" << i;
  out << "\n";
  for (int k = 0; k < s.loop.size(); ++k) {
    out << k;
    for (int i = 0; i < s.loop.dim(); ++i) out << "," << s.loop.nodes[static_cast<std::size_t>(k)](i);
    out << "\n";
  }
  return out.str();
}

}  // namespace fuller
