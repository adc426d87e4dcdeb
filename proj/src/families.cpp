#include "fuller/families.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <sstream>

#include <json.hpp>

#include "fuller/io.hpp"

namespace fuller {

using nlohmann::json;

VectorFieldSpec FamilySpec::at(double t) const {
  if (kind == FamilyKind::Field) return field_at(t);
  return geodesic_field(metric_at(t), model).field;
}

Closure FamilySpec::closure(const FreeHomotopyClass& cls) const {
  if (kind == FamilyKind::Metric) {
    const ClassDeck deck = class_deck(model, cls);
    if (deck.has_mobius) return Closure::geodesic(deck, 2 * model.dim);
    Vec shift = Vec::Zero(2 * model.dim);
    shift.head(model.dim) = deck.shift;
    return Closure::lattice(shift);
  }
  const VectorFieldSpec f = field_at(0.0);
  if (cls.lattice.size() != f.periodic.size())
    fail(ErrorKind::InvalidInput, "class " + to_string(cls) + " does not match the periodic coordinates");
  Vec shift = Vec::Zero(f.phase_dim);
  for (std::size_t i = 0; i < f.periodic.size(); ++i)
    shift(f.periodic[i].index) = static_cast<double>(cls.lattice[i]) * f.periodic[i].period;
  return Closure::lattice(shift);
}

bool FamilySpec::inside_window(const Vec& z) const {
  for (int i : window_coords)
    if (std::abs(z(i)) > window) return false;
  return true;
}

// ---------------------------------------------------------------------------

namespace {

void allow_keys(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
  for (const auto& [k, v] : j.items()) {
    bool ok = false;
    for (const char* a : keys) ok = ok || k == a;
    if (!ok) fail(ErrorKind::InvalidInput, "unknown key '" + k + "' in " + where);
  }
}

double lerp(double a, double b, double t) { return a + (b - a) * t; }

VectorFieldSpec escape_field(double t) {
  const double c = std::tan(std::numbers::pi * t / 2);
  VectorFieldSpec f;
  f.phase_dim = 2;
  f.eval = [c](const Vec& z) { return Vec((Vec(2) << 1.0, z(1) - c).finished()); };
  f.jacobian = [](const Vec&) { return Mat((Mat(2, 2) << 0, 0, 0, 1).finished()); };
  f.periodic = {{0, 2 * std::numbers::pi}};
  return f;
}

// r' = (t - t_fold) + (r - 1)^2, theta' = 1, z' = -z in coordinates (r, theta, z)
VectorFieldSpec fold_field(double t, double t_fold) {
  const double mu = t - t_fold;
  VectorFieldSpec f;
  f.phase_dim = 3;
  f.eval = [mu](const Vec& z) {
    return Vec((Vec(3) << mu + (z(0) - 1) * (z(0) - 1), 1.0, -z(2)).finished());
  };
  f.jacobian = [](const Vec& z) {
    Mat j = Mat::Zero(3, 3);
    j(0, 0) = 2 * (z(0) - 1);
    j(2, 2) = -1;
    return j;
  };
  f.periodic = {{1, 2 * std::numbers::pi}};
  return f;
}

// theta' = 1 - (1 - floor) t, s' = -s: period 2 pi / (1 - (1 - floor) t)
VectorFieldSpec blow_up_field(double t, double floor_rate) {
  const double w = 1.0 - (1.0 - floor_rate) * t;
  VectorFieldSpec f;
  f.phase_dim = 2;
  f.eval = [w](const Vec& z) { return Vec((Vec(2) << w, -z(1)).finished()); };
  f.jacobian = [](const Vec&) { return Mat((Mat(2, 2) << 0, 0, 0, -1).finished()); };
  f.periodic = {{0, 2 * std::numbers::pi}};
  return f;
}

std::vector<Vec> grid_seeds(int coord, int dim, double lo, double hi, int n) {
  std::vector<Vec> out;
  for (int k = 0; k < n; ++k) {
    Vec z = Vec::Zero(dim);
    z(coord) = lerp(lo, hi, n == 1 ? 0.5 : static_cast<double>(k) / (n - 1));
    out.push_back(z);
  }
  return out;
}

}  // namespace

FamilySpec parse_family(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    fail(ErrorKind::InvalidInput, std::string("family file: ") + e.what());
  }
  try {
    allow_keys(j, {"kind", "name", "model", "parameterization", "grid", "period_ceiling", "window", "smoothness"},
               "family file");
    FamilySpec f;
    const std::string kind = j.at("kind").get<std::string>();
    const json& par = j.at("parameterization");
    const std::string pname = par.at("name").get<std::string>();
    f.name = j.value("name", pname);
    f.grid = j.value("grid", 101);
    f.period_ceiling = j.value("period_ceiling", 1e3);
    f.smoothness = j.value("smoothness", f.smoothness);
    if (f.grid < 2) fail(ErrorKind::InvalidInput, "family grid needs at least 2 points");
    if (kind == "metric_family") {
      if (!j.contains("model")) fail(ErrorKind::InvalidInput, "metric family without a model");
      const ModelFile mf = parse_model(j.at("model").dump());
      f.kind = FamilyKind::Metric;
      f.model = mf.model;
      f.class_model = mf.model;
      if (mf.model.kind == ModelKind::WarpedCylinder) {
        f.window_coords = {0};
        f.window = mf.model.window;
      }
      if (j.contains("window")) f.window = j.at("window").get<double>();
      allow_keys(par, {"name", "from", "to"}, "parameterization " + pname);
      const double a = par.at("from").get<double>(), b = par.at("to").get<double>();
      if (pname == "scaling") {
        f.metric_at = [mf, a, b](double t) { return standard_metric(mf.model, mf.bumps, mf.scale * lerp(a, b, t)); };
      } else if (pname == "bump_amplitude") {
        if (mf.bumps.empty()) fail(ErrorKind::InvalidInput, "bump_amplitude family on a model without bumps");
        f.metric_at = [mf, a, b](double t) {
          std::vector<Bump> bumps = mf.bumps;
          for (Bump& x : bumps) x.amplitude = lerp(a, b, t);
          return standard_metric(mf.model, bumps, mf.scale);
        };
      } else if (pname == "warp_center") {
        if (mf.model.kind != ModelKind::WarpedCylinder)
          fail(ErrorKind::InvalidInput, "warp_center family needs a warped cylinder");
        f.metric_at = [mf, a, b](double t) {
          WarpProfile w = mf.model.warp;
          w.center = lerp(a, b, t);
          return standard_metric(ModelSpace::warped_cylinder(w, mf.model.window), mf.bumps, mf.scale);
        };
      } else {
        fail(ErrorKind::InvalidInput, "unknown metric family parameterization '" + pname + "'");
      }
      return f;
    }
    if (kind != "field_family") fail(ErrorKind::InvalidInput, "unknown family kind '" + kind + "'");
    if (j.contains("model")) fail(ErrorKind::InvalidInput, "field families carry no model");
    f.kind = FamilyKind::Field;
    f.window = j.value("window", std::numeric_limits<double>::infinity());
    if (pname == "escape") {
      allow_keys(par, {"name"}, "parameterization escape");
      f.field_at = escape_field;
      f.window_coords = {1};
      const double w = std::isfinite(f.window) ? f.window : 10.0;
      f.seeds = [w](double) { return grid_seeds(1, 2, -0.9 * w, 0.9 * w, 13); };
      f.smoothness = "real-analytic on [0, 1)";
    } else if (pname == "fold") {
      allow_keys(par, {"name", "fold_at"}, "parameterization fold");
      const double tf = par.value("fold_at", 0.5);
      f.field_at = [tf](double t) { return fold_field(t, tf); };
      f.describe_t = [tf](double t) {
        char buf[48];
        std::snprintf(buf, sizeof buf, "mu = %.6f", std::abs(t - tf) < 5e-7 ? 0.0 : t - tf);
        return std::string(buf);
      };
      f.seeds = [](double) { return grid_seeds(0, 3, 0.05, 1.95, 14); };
      f.window_coords = {0, 2};
    } else if (pname == "blow_up") {
      allow_keys(par, {"name", "floor"}, "parameterization blow_up");
      const double fl = par.value("floor", 1e-4);
      if (!(fl > 0)) fail(ErrorKind::InvalidInput, "blow_up floor must be positive");
      f.field_at = [fl](double t) { return blow_up_field(t, fl); };
      f.seeds = [](double) { return grid_seeds(1, 2, -1, 1, 3); };
      f.window_coords = {1};
    } else {
      fail(ErrorKind::InvalidInput, "unknown field family parameterization '" + pname + "'");
    }
    const int periodic = static_cast<int>(f.field_at(0.0).periodic.size());
    f.class_model = ModelSpace::flat_torus(Mat::Identity(periodic, periodic));
    return f;
  } catch (const json::exception& e) {
    fail(ErrorKind::InvalidInput, std::string("family file: ") + e.what());
  }
}

FamilySpec load_family(const std::string& path) { return parse_family(read_text_file(path)); }

void validate_family(const FamilySpec& family, int grid_stride, int samples) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < family.grid; k += std::max(1, grid_stride)) {
    const double t = static_cast<double>(k) / (family.grid - 1);
    if (family.kind == FamilyKind::Metric) {
      validate_metric(family.metric_at(t), family.model, samples);
      continue;
    }
    const VectorFieldSpec f = family.field_at(t);
    const double box = std::isfinite(family.window) ? family.window : 2.0;
    for (int s = 0; s < samples; ++s) {
      Vec z(f.phase_dim);
      for (int i = 0; i < f.phase_dim; ++i) z(i) = box * u(rng);
      const Vec v = f.eval(z);
      if (!v.allFinite()) fail(ErrorKind::NonFinite, "family field not finite at t = " + std::to_string(t));
      if (v.norm() == 0.0) fail(ErrorKind::InvalidInput, "family field vanishes at t = " + std::to_string(t));
    }
  }
}

std::string to_string(BranchStatus s) {
  switch (s) {
    case BranchStatus::ClosedLoop: return "ClosedLoop";
    case BranchStatus::ReachedEndpoint: return "ReachedEndpoint";
    case BranchStatus::Fold: return "Fold";
    case BranchStatus::PeriodBlowUp: return "PeriodBlowUp";
    case BranchStatus::EscapedWindow: return "EscapedWindow";
    case BranchStatus::Stalled: return "Stalled";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Continuation.  Unknowns u = (z, T, t); rows: closure, section, integrals.

namespace {

struct Continuer {
  const FamilySpec& family;
  Closure closure;
  std::vector<double> integral_targets;
  ContinuationSettings cfg;
  int n = 0;

  struct Eval {
    Vec residual;  // without the arclength row
    Mat jacobian;
    Mat monodromy;
  };

  Vec flow_end(double t, const Vec& z, double T) const {
    return integrate_flow(family.at(t), z, T, cfg.integration_tol).end_unwrapped;
  }

  std::vector<double> integrals_at(double t, const Vec& z) const {
    std::vector<double> out;
    for (const auto& I : family.at(t).integrals) out.push_back(I.value(z));
    return out;
  }

  Eval evaluate(const Vec& u, const Vec& sec_point, const Vec& sec_normal) const {
    const Vec z = u.head(n);
    const double T = u(n), t = u(n + 1);
    if (!(T > 0)) fail(ErrorKind::NewtonDiverged, "period became non-positive");
    const VectorFieldSpec f = family.at(t);
    const FlowWithMonodromy fm = integrate_with_monodromy(f, z, T, cfg.integration_tol);
    const int k = static_cast<int>(f.integrals.size());
    Eval e;
    e.residual.resize(n + 1 + k);
    e.jacobian = Mat::Zero(n + 1 + k, n + 2);
    e.residual.head(n) = fm.end - closure.apply(z);
    e.jacobian.topLeftCorner(n, n) = fm.monodromy - closure.jacobian(z);
    e.jacobian.block(0, n, n, 1) = f.eval(fm.end);
    // d/dt by a central difference kept inside [0, 1]
    const double h = 1e-6;
    const double tp = std::min(1.0, t + h), tm = std::max(0.0, t - h);
    e.jacobian.block(0, n + 1, n, 1) = (flow_end(tp, z, T) - flow_end(tm, z, T)) / (tp - tm);
    e.residual(n) = sec_normal.dot(z - sec_point);
    e.jacobian.block(n, 0, 1, n) = sec_normal.transpose();
    if (k > 0) {
      const VectorFieldSpec fp = family.at(tp), fmn = family.at(tm);
      for (int i = 0; i < k; ++i) {
        e.residual(n + 1 + i) = f.integrals[static_cast<std::size_t>(i)].value(z) -
                                integral_targets[static_cast<std::size_t>(i)];
        e.jacobian.block(n + 1 + i, 0, 1, n) = f.integrals[static_cast<std::size_t>(i)].gradient(z).transpose();
        e.jacobian(n + 1 + i, n + 1) = (fp.integrals[static_cast<std::size_t>(i)].value(z) -
                                        fmn.integrals[static_cast<std::size_t>(i)].value(z)) /
                                       (tp - tm);
      }
    }
    Mat jc = closure.jacobian(z);
    e.monodromy = jc.lu().solve(fm.monodromy);
    return e;
  }

  Vec weights(const Vec& u) const {
    Vec w = Vec::Ones(n + 2);
    w(n) = 1.0 / std::max(1.0, std::abs(u(n)));
    return w;
  }

  // Unit null vector of J (in weighted coordinates) closest to `ref`.
  Vec tangent(const Mat& jac, const Vec& w, const Vec& ref) const {
    const Mat js = jac * w.cwiseInverse().asDiagonal();
    Eigen::JacobiSVD<Mat> svd(js, Eigen::ComputeFullV);
    const Vec& sv = svd.singularValues();
    const int cols = static_cast<int>(js.cols());
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
      if (sv(i) > 1e-7 * sv(0)) ++rank;
    const Mat null = svd.matrixV().rightCols(std::max(1, cols - rank));
    Vec tau = null * (null.transpose() * ref);
    if (tau.norm() < 1e-8) tau = svd.matrixV().col(cols - 1);
    tau.normalize();
    if (tau.dot(ref) < 0) tau = -tau;
    return tau;
  }

  struct Corrected {
    bool ok = false;
    Vec u;
    Eval eval;
    int iterations = 0;
  };

  // Newton with an optional hyperplane row w.(u - pred).tau = 0.
  Corrected correct(Vec u, const Vec& sec_point, const Vec& sec_normal, const Vec* tau, const Vec* w,
                    const Vec& pred, std::optional<double> fixed_t) const {
    Corrected c;
    try {
      for (int it = 0; it <= cfg.max_corrector; ++it) {
        c.eval = evaluate(u, sec_point, sec_normal);
        Vec r = c.eval.residual;
        Mat j = c.eval.jacobian;
        if (fixed_t) {
          j.conservativeResize(Eigen::NoChange, n + 1);
        } else if (tau) {
          r.conservativeResize(r.size() + 1);
          j.conservativeResize(j.rows() + 1, Eigen::NoChange);
          r(r.size() - 1) = tau->dot(w->cwiseProduct(u - pred));
          j.row(j.rows() - 1) = tau->cwiseProduct(*w).transpose();
        }
        if (r.cwiseAbs().maxCoeff() < cfg.corrector_tol) {
          c.ok = true;
          c.u = u;
          c.iterations = it;
          return c;
        }
        if (it == cfg.max_corrector) break;
        const Vec du = j.completeOrthogonalDecomposition().solve(-r);
        if (!du.allFinite()) break;
        if (fixed_t)
          u.head(n + 1) += du;
        else
          u += du;
      }
    } catch (const Error&) {
    }
    return c;
  }

  ClosedOrbitRecord record(const Vec& u, const Eval& e) const {
    ClosedOrbitRecord rec;
    rec.start = u.head(n);
    rec.period = u(n);
    rec.closure = closure;
    rec.monodromy = e.monodromy;
    rec.residual = e.residual.head(n).cwiseAbs().maxCoeff();
    const VectorFieldSpec f = family.at(u(n + 1));
    rec.loop = {rec.start};
    rec.loop_velocity = {f.eval(rec.start)};
    try {
      const TransverseSpectrum ts = transverse_spectrum(f, rec.start, e.monodromy);
      rec.return_map = ts.return_map;
      rec.transverse_basis = ts.basis;
      rec.multipliers = ts.multipliers;
      rec.flow_defect = ts.flow_defect;
      rec.monodromy_det = e.monodromy.determinant();
      rec.index = fixed_point_index(rec, calibrated_convention());
    } catch (const Error&) {
      rec.index.reset();
    }
    return rec;
  }
};

double unit_gap(const ClosedOrbitRecord& rec) {
  double g = std::numeric_limits<double>::infinity();
  for (auto l : rec.multipliers) g = std::min(g, std::abs(l - 1.0));
  return g;
}

}  // namespace

FamilyBranch continue_branch(const FamilySpec& family, const ClosedOrbitRecord& start, double t0,
                             const ContinuationSettings& settings) {
  if (!(start.residual < 1e-8))
    fail(ErrorKind::InvalidInput, "continuation start has residual " + std::to_string(start.residual));
  Continuer c{family, start.closure, {}, settings, static_cast<int>(start.start.size())};
  const int n = c.n;
  c.integral_targets = c.integrals_at(t0, start.start);
  const double ceiling = family.period_ceiling * settings.ceiling_factor;
  FamilySpec windowed = family;
  windowed.window = family.window * settings.window_factor;

  FamilyBranch br;
  Vec u(n + 2);
  u << start.start, start.period, t0;
  br.points.push_back({t0, 0.0, start});

  auto section_at = [&](const Vec& x) {
    const VectorFieldSpec f = family.at(x(n + 1));
    return std::pair<Vec, Vec>{x.head(n), f.eval(x.head(n))};
  };
  auto [sp, sn] = section_at(u);
  Vec ref = Vec::Zero(n + 2);
  ref(n + 1) = settings.direction >= 0 ? 1.0 : -1.0;
  Continuer::Eval ev = c.evaluate(u, sp, sn);
  Vec w = c.weights(u);
  Vec tau = c.tangent(ev.jacobian, w, ref);
  double ds = settings.ds, s = 0.0;
  bool folded = false;

  auto finish = [&](BranchStatus st, const std::string& why) {
    br.end_reason = st;
    br.status = folded ? BranchStatus::Fold : st;
    br.diagnostics = why;
    return br;
  };

  for (int step = 0; step < settings.max_steps; ++step) {
    if (ds < settings.ds_min)
      return finish(BranchStatus::Stalled, "step size fell below " + std::to_string(settings.ds_min) + " at t = " +
                                               std::to_string(u(n + 1)));
    const Vec pred = u + ds * w.cwiseInverse().cwiseProduct(tau);
    const double tp = pred(n + 1);
    if (tp > 1.0 || tp < 0.0) {
      // land exactly on the boundary with t frozen
      const double b = tp > 1.0 ? 1.0 : 0.0;
      Vec guess = u + (b - u(n + 1)) / (pred(n + 1) - u(n + 1)) * (pred - u);
      guess(n + 1) = b;
      Continuer::Corrected cc = c.correct(guess, sp, sn, nullptr, nullptr, guess, b);
      if (cc.ok) {
        s += ds;
        br.points.push_back({b, s, c.record(cc.u, cc.eval)});
        if (!windowed.inside_window(cc.u.head(n)))
          return finish(BranchStatus::EscapedWindow, "left the window at t = " + std::to_string(b));
        return finish(BranchStatus::ReachedEndpoint, "reached t = " + std::to_string(b));
      }
      ds /= 2;
      continue;
    }
    Continuer::Corrected cc = c.correct(pred, sp, sn, &tau, &w, pred, std::nullopt);
    if (!cc.ok || (w.cwiseProduct(cc.u - pred)).norm() > std::max(ds, 1e-6)) {
      ds /= 2;
      continue;
    }
    const Vec w_new = c.weights(cc.u);
    Vec tau_new = c.tangent(cc.eval.jacobian, w_new, tau);
    if (tau_new(n + 1) * tau(n + 1) < 0 && std::abs(tau(n + 1)) > 1e-12) {
      // fold between u and cc.u: bisect the arc parameter
      double lo = 0.0, hi = ds;
      Vec ulo = u, uhi = cc.u;
      Continuer::Corrected mid_c = cc;
      while (hi - lo > settings.fold_tol) {
        const double mid = 0.5 * (lo + hi);
        const Vec pm = u + mid * w.cwiseInverse().cwiseProduct(tau);
        Continuer::Corrected m = c.correct(pm, sp, sn, &tau, &w, pm, std::nullopt);
        if (!m.ok) break;
        const Vec tm = c.tangent(m.eval.jacobian, c.weights(m.u), tau);
        mid_c = m;
        if (tm(n + 1) * tau(n + 1) > 0) {
          lo = mid;
          ulo = m.u;
        } else {
          hi = mid;
          uhi = m.u;
        }
      }
      const ClosedOrbitRecord fr = c.record(mid_c.u, mid_c.eval);
      br.folds.push_back({mid_c.u(n + 1), s + 0.5 * (lo + hi), mid_c.u.head(n), mid_c.u(n), unit_gap(fr),
                          std::abs(uhi(n + 1) - ulo(n + 1))});
      folded = true;
    }
    s += ds;
    u = cc.u;
    w = w_new;
    tau = tau_new;
    br.points.push_back({u(n + 1), s, c.record(u, cc.eval)});
    std::tie(sp, sn) = section_at(u);
    if (cc.iterations <= 3) ds = std::min(settings.ds_max, ds * 1.5);

    if (!windowed.inside_window(u.head(n)))
      return finish(BranchStatus::EscapedWindow, "left the window at t = " + std::to_string(u(n + 1)));
    if (u(n) > ceiling && br.points.size() > 10) {
      bool rising = true;
      for (std::size_t k = br.points.size() - 10; k < br.points.size(); ++k)
        rising = rising && br.points[k].orbit.period > br.points[k - 1].orbit.period;
      if (rising)
        return finish(BranchStatus::PeriodBlowUp, "period " + std::to_string(u(n)) + " above ceiling " +
                                                      std::to_string(ceiling) + " at t = " + std::to_string(u(n + 1)));
    }
    if (br.points.size() > 10) {
      Vec u0(n + 2);
      u0 << start.start, start.period, t0;
      if (w.cwiseProduct(u - u0).norm() < 0.5 * ds) return finish(BranchStatus::ClosedLoop, "returned to the start");
    }
  }
  return finish(BranchStatus::Stalled, "step budget of " + std::to_string(settings.max_steps) + " exhausted at t = " +
                                           std::to_string(u(n + 1)));
}

// ---------------------------------------------------------------------------

std::vector<ClosedOrbitRecord> endpoint_orbits(const FamilySpec& family, const FreeHomotopyClass& cls, double t,
                                               const VariationalOptions& opt) {
  std::vector<ClosedOrbitRecord> out;
  if (family.kind == FamilyKind::Metric) {
    const MetricSpec metric = family.metric_at(t);
    std::vector<GeodesicString> strings = geodesic_strings(metric, family.model, cls, opt);
    // a Morse-Bott family is continued through one representative
    if (!strings.empty() && strings.front().degenerate_family) strings.resize(1);
    for (const auto& s : strings) out.push_back(lift_to_unit_bundle(s, metric, family.model));
    return out;
  }
  const VectorFieldSpec f = family.field_at(t);
  const Closure cl = family.closure(cls);
  std::vector<ClosedOrbitRecord> found;
  for (const Vec& z0 : family.seeds(t)) {
    OrbitSearchOptions so;
    so.closure = cl;
    so.loop_samples = 64;
    try {
      ClosedOrbitRecord rec = find_closed_orbit(f, z0, Section{z0, f.eval(z0)}, so);
      if (rec.residual < 1e-8 && family.inside_window(rec.start)) {
        rec.cls = cls;
        found.push_back(rec);
      }
    } catch (const Error&) {
    }
  }
  return s1_dedupe(found, f.periodic);
}

SkyReport detect_sky_catastrophe(const FamilySpec& family, const FreeHomotopyClass& cls,
                                 const std::vector<SkyBranch>& branches) {
  (void)family;
  SkyReport r;
  r.branches = branches;
  for (const auto& b : branches) {
    const BranchStatus st = b.branch.end_reason;
    if (st != BranchStatus::PeriodBlowUp && st != BranchStatus::EscapedWindow) continue;
    const auto& pts = b.branch.points;
    const bool rising = pts.size() < 2 || pts.back().t >= pts[pts.size() - 2].t;
    r.flagged = true;
    r.verdict = "catastrophe in class " + to_string(cls) + ": " + to_string(st) + " at t→" + (rising ? "1" : "0");
    return r;
  }
  r.verdict = "no catastrophe observed within budget";
  return r;
}

SkyReport sky_analysis(const FamilySpec& family, const FreeHomotopyClass& cls, const ContinuationSettings& settings,
                       const VariationalOptions& opt) {
  std::vector<SkyBranch> branches;
  for (double t : {0.0, 1.0}) {
    ContinuationSettings cs = settings;
    cs.direction = t == 0.0 ? 1 : -1;
    for (const ClosedOrbitRecord& o : endpoint_orbits(family, cls, t, opt))
      branches.push_back({t, continue_branch(family, o, t, cs)});
  }
  return detect_sky_catastrophe(family, cls, branches);
}

SpreadReport length_spread_criterion(const FamilySpec& family, const FreeHomotopyClass& cls, int samples,
                                     const VariationalOptions& opt) {
  if (family.kind != FamilyKind::Metric) fail(ErrorKind::InvalidInput, "length spread needs a family of metrics");
  SpreadReport r;
  r.ceiling = family.period_ceiling;
  const int m = samples > 0 ? samples : family.grid;
  for (int k = 0; k < m; ++k) {
    const double t = m == 1 ? 0.0 : static_cast<double>(k) / (m - 1);
    const std::vector<GeodesicString> strings = geodesic_strings(family.metric_at(t), family.model, cls, opt);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& s : strings) {
      lo = std::min(lo, s.length);
      hi = std::max(hi, s.length);
    }
    const double spread = strings.empty() ? 0.0 : hi - lo;
    r.t.push_back(t);
    r.spread.push_back(spread);
    r.strings.push_back(static_cast<int>(strings.size()));
    r.sup = std::max(r.sup, spread);
  }
  r.satisfied = r.sup < r.ceiling;
  char buf[64];
  std::snprintf(buf, sizeof buf, r.sup < 1e3 ? "%.2f" : "%.3e", r.sup);
  r.verdict = std::string("sup spread = ") + buf + (r.satisfied ? "; criterion satisfied" : "; criterion violated");
  r.note = r.satisfied ? "class is taut along the family, conditional on the string search being complete at every "
                         "sampled t"
                       : "length spread exceeds the ceiling " + std::to_string(r.ceiling);
  return r;
}

InvarianceReport basic_invariance_check(const FamilySpec& family, const FreeHomotopyClass& cls,
                                        const std::vector<double>& interior, const VariationalOptions& opt) {
  if (family.kind != FamilyKind::Metric) fail(ErrorKind::InvalidInput, "basic invariance needs a family of metrics");
  InvarianceReport r;
  r.report0 = F_invariant(family.metric_at(0.0), family.model, cls, opt);
  r.report1 = F_invariant(family.metric_at(1.0), family.model, cls, opt);
  r.F0 = r.report0.F;
  r.F1 = r.report1.F;
  r.equal = r.F0 == r.F1;
  for (double t : interior) {
    const Rational v = F_invariant(family.metric_at(t), family.model, cls, opt).F;
    r.interior.push_back({t, v});
    r.equal = r.equal && v == r.F0;
  }
  return r;
}

GeodesibleReport geodesible_check(const VectorFieldSpec& field, const MetricSpec& metric, const ModelSpace& model,
                                  int samples, std::uint64_t seed) {
  const int n = model.dim;
  const bool phase = field.phase_dim == 2 * n;
  if (!phase && field.phase_dim != n)
    fail(ErrorKind::InvalidInput, "field dimension matches neither the base nor the phase space");
  const GeodesicFlowField flow = geodesic_field(metric, model);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  GeodesibleReport r;
  r.samples = samples;
  // velocity of the (projected) flow line through p
  auto velocity = [&](const Vec& p) { return Vec(field.eval(p).head(n)); };
  for (int s = 0; s < samples; ++s) {
    const Vec x = sample_point(model, rng);
    Vec p = x;
    if (phase) {
      Vec dir(n);
      for (int i = 0; i < n; ++i) dir(i) = nd(rng);
      p = flow.unit_phase_point(x, dir);
    }
    const Vec X = velocity(p);
    const Vec flowdir = field.eval(p);
    const double h = 1e-5;
    const Vec acc = (velocity(Vec(p + h * flowdir)) - velocity(Vec(p - h * flowdir))) / (2 * h);
    Vec zx(2 * n);
    zx << x, X;
    const Vec geo = flow.field.eval(zx).tail(n);
    const Mat g = metric.kind == MetricKind::Riemannian ? metric.tensor<double>(x) : Mat::Identity(n, n);
    const Vec d = acc - geo;
    r.speed_deviation = std::max(r.speed_deviation, std::abs(metric.norm<double>(x, X) - 1.0));
    r.residual = std::max(r.residual, std::sqrt(d.dot(g * d)));
  }
  r.consistent = r.speed_deviation < 1e-6 && r.residual < 1e-6;
  r.verdict = r.consistent ? "geodesible-consistent" : "not geodesible for this metric";
  return r;
}

// ---------------------------------------------------------------------------

std::string branch_csv(const FamilyBranch& branch) {
  std::ostringstream out;
  out.precision(12);
  out << "# status " << to_string(branch.status) << ", end " << to_string(branch.end_reason) << ": "
      << branch.diagnostics << "\n";
  const int n = branch.points.empty() ? 0 : static_cast<int>(branch.points.front().orbit.start.size());
  const std::size_t nm = branch.points.empty() ? 0 : branch.points.front().orbit.multipliers.size();
  out << "t,s,period";
  for (int i = 0; i < n; ++i) out << ",z" << i;
  for (std::size_t i = 0; i < nm; ++i) out << ",re" << i << ",im" << i;
  out << "\n";
  for (const auto& p : branch.points) {
    out << p.t << "," << p.s << "," << p.orbit.period;
    for (int i = 0; i < n; ++i) out << "," << p.orbit.start(i);
    for (std::size_t i = 0; i < nm; ++i) {
      const auto l = i < p.orbit.multipliers.size() ? p.orbit.multipliers[i] : std::complex<double>(NAN, NAN);
      out << "," << l.real() << "," << l.imag();
    }
    out << "\n";
  }
  return out.str();
}

namespace {

json branch_summary(const FamilyBranch& b) {
  json j;
  j["status"] = to_string(b.status);
  j["end_reason"] = to_string(b.end_reason);
  j["points"] = b.points.size();
  if (!b.points.empty()) {
    j["t_first"] = b.points.front().t;
    j["t_last"] = b.points.back().t;
    j["period_last"] = b.points.back().orbit.period;
  }
  json folds = json::array();
  for (const auto& f : b.folds)
    folds.push_back({{"t", f.t}, {"period", f.period}, {"unit_multiplier_gap", f.unit_multiplier_gap},
                     {"t_gap", f.t_gap}});
  j["folds"] = folds;
  j["diagnostics"] = b.diagnostics;
  return j;
}

}  // namespace

std::string sky_json(const SkyReport& r) {
  nlohmann::ordered_json j;
  j["flagged"] = r.flagged;
  j["verdict"] = r.verdict;
  j["note"] = "observation within the period ceiling and spatial window, not a proof";
  json br = json::array();
  for (const auto& b : r.branches) {
    json x = branch_summary(b.branch);
    x["t_start"] = b.t_start;
    br.push_back(x);
  }
  j["branches"] = br;
  return j.dump(2);
}

std::string spread_json(const SpreadReport& r) {
  nlohmann::ordered_json j;
  j["sup"] = r.sup;
  j["ceiling"] = r.ceiling;
  j["satisfied"] = r.satisfied;
  j["verdict"] = r.verdict;
  j["note"] = r.note;
  j["t"] = r.t;
  j["spread"] = r.spread;
  j["strings"] = r.strings;
  return j.dump(2);
}

}  // namespace fuller
