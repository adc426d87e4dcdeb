#include "fuller/orbits.hpp"

#include <map>
#include <numbers>
#include <numeric>

#include <json.hpp>

namespace fuller {

Closure Closure::lattice(Vec shift) {
  Closure c;
  c.shift = std::move(shift);
  return c;
}

Closure Closure::geodesic(const ClassDeck& deck, int phase_dim) {
  Closure c;
  c.shift = Vec::Zero(phase_dim);
  c.deck = deck;
  return c;
}

Vec Closure::apply(const Vec& z) const {
  if (deck) return deck->apply_phase<double>(z);
  return z + shift;
}

Vec Closure::apply_inverse(const Vec& z) const {
  if (deck) return deck->inverse().apply_phase<double>(z);
  return z - shift;
}

Mat Closure::jacobian(const Vec& z) const {
  if (deck) return deck->phase_jacobian(z);
  return Mat::Identity(z.size(), z.size());
}

Closure Closure::power(int n) const {
  Closure c = *this;
  c.shift = shift * n;
  if (deck) c.deck = deck->power(n);
  if (deck && !root_deck) c.root_deck = *deck;
  c.root_power = root_power * n;
  return c;
}

IndexConvention calibrated_convention() {
  return {-1, "sigma=-1; i = sigma^floor(d/2) sign det(I - dP); simple hyperbolic closed geodesic counts +1"};
}

int calibrate_sigma(int raw_sign) { return raw_sign > 0 ? 1 : -1; }

namespace {

Vec wrap_difference(Vec d, const std::vector<PeriodicCoord>& periodic) {
  for (const auto& p : periodic) d(p.index) -= p.period * std::round(d(p.index) / p.period);
  return d;
}

// Orthonormal basis of the null space of the rows of g.
Mat null_space(const Mat& g, int dim) {
  if (g.rows() == 0) return Mat::Identity(dim, dim);
  Eigen::JacobiSVD<Mat> svd(g, Eigen::ComputeFullV);
  const int rank = static_cast<int>(g.rows());
  return svd.matrixV().rightCols(dim - rank);
}

// Orthonormal basis of the orthogonal complement of unit vector u.
Mat complement(const Vec& u) {
  const int n = static_cast<int>(u.size());
  Mat m(n, 1);
  m.col(0) = u;
  Eigen::HouseholderQR<Mat> qr(m);
  Mat q = qr.householderQ() * Mat::Identity(n, n);
  return q.rightCols(n - 1);
}

int index_from_return_map(const Mat& p, const IndexConvention& conv, bool& degenerate) {
  const int d = static_cast<int>(p.rows());
  degenerate = false;
  if (d == 0) return 1;
  Eigen::ComplexEigenSolver<Mat> es(p);
  const auto ev = es.eigenvalues();
  double prod_sign = 1.0;
  for (int i = 0; i < ev.size(); ++i) {
    const auto one_minus = std::complex<double>(1.0, 0.0) - ev(i);
    if (std::abs(one_minus) < 1e-9 * std::max(1.0, std::abs(ev(i)))) degenerate = true;
  }
  if (degenerate) return 0;
  const double det = (Mat::Identity(d, d) - p).determinant();
  prod_sign = det > 0 ? 1.0 : -1.0;
  const int sign_sigma = (d / 2) % 2 == 1 ? conv.sigma : 1;
  return sign_sigma * static_cast<int>(prod_sign);
}

double max_norm(const Vec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

TransverseSpectrum transverse_spectrum(const VectorFieldSpec& field, const Vec& z, const Mat& m) {
  const int dim = static_cast<int>(z.size());
  Mat g(static_cast<int>(field.integrals.size()), dim);
  for (std::size_t k = 0; k < field.integrals.size(); ++k)
    g.row(static_cast<int>(k)) = field.integrals[k].gradient(z).transpose();
  const Mat q = null_space(g, dim);
  const Vec f = field.eval(z);
  const Vec fq = q.transpose() * f;
  const double fn = fq.norm();
  if (!(fn > 1e-12 * std::max(1.0, f.norm())))
    fail(ErrorKind::IllConditioned, "flow direction vanishes on the level set");
  const Mat mt = q.transpose() * m * q;
  TransverseSpectrum ts;
  ts.flow_defect = (mt * fq - fq).norm() / fn;
  if (ts.flow_defect > 1e-4)
    fail(ErrorKind::IllConditioned, "flow direction is not an eigenvector of the monodromy (defect " +
                                        std::to_string(ts.flow_defect) + ")");
  ts.restricted_det = mt.determinant();
  const Mat w = complement(fq / fn);
  ts.return_map = w.transpose() * mt * w;
  ts.basis = q * w;
  if (ts.return_map.rows() > 0) {
    Eigen::ComplexEigenSolver<Mat> es(ts.return_map);
    for (int i = 0; i < es.eigenvalues().size(); ++i) ts.multipliers.push_back(es.eigenvalues()(i));
    std::sort(ts.multipliers.begin(), ts.multipliers.end(), [](auto a, auto b) {
      if (std::abs(a) != std::abs(b)) return std::abs(a) > std::abs(b);
      return a.imag() > b.imag();
    });
  }
  return ts;
}

std::vector<std::complex<double>> floquet_multipliers(const VectorFieldSpec& field, const ClosedOrbitRecord& orbit) {
  if (!(orbit.residual < 1e-8)) fail(ErrorKind::InvalidInput, "orbit residual too large for Floquet analysis");
  return transverse_spectrum(field, orbit.start, orbit.monodromy).multipliers;
}

ClosedOrbitRecord find_closed_orbit(const VectorFieldSpec& field, const Vec& seed, const Section& section,
                                    const OrbitSearchOptions& opt) {
  const int dim = static_cast<int>(seed.size());
  const Vec p = section.point;
  const Vec nrm = section.normal.normalized();
  const Vec f0 = field.eval(seed);
  if (std::abs(nrm.dot(f0)) < 1e-8 * f0.norm()) fail(ErrorKind::TangentialCrossing, "seed flow is tangent to section");
  const double dir = nrm.dot(f0) > 0 ? 1.0 : -1.0;

  std::vector<double> targets;
  for (const auto& integral : field.integrals) targets.push_back(integral.value(seed));

  Closure closure;
  double period = 0.0;
  Vec z = seed;
  if (opt.closure && opt.period_guess > 0) {
    closure = *opt.closure;
    period = opt.period_guess;
  } else {
    // first return to the section, up to the closure or a lattice shift
    auto offset = [&](const Vec& y) -> Vec {
      if (opt.closure) return opt.closure->apply_inverse(y) - p;
      return wrap_difference(y - p, field.periodic);
    };
    bool left = false, found = false;
    double t_hit = 0.0;
    Vec y_hit;
    IntegratorOptions iopt;
    iopt.tol = opt.integration_tol;
    StepStats stats;
    integrate_adaptive(field.eval, seed, 0.0, opt.max_time, iopt, stats,
                       [&](double t0, const Vec& y0, double t1, const Vec& y1) {
                         const Vec w0 = offset(y0), w1 = offset(y1);
                         if (w1.norm() > opt.return_radius / 2) left = true;
                         if (!left) return true;
                         const double g0 = dir * nrm.dot(w0), g1 = dir * nrm.dot(w1);
                         if (g0 < 0 && g1 >= 0 && w0.norm() < opt.return_radius && w1.norm() < opt.return_radius) {
                           const double s = g0 / (g0 - g1);
                           t_hit = t0 + s * (t1 - t0);
                           y_hit = y0 + s * (y1 - y0);
                           found = true;
                           return false;
                         }
                         return true;
                       });
    if (!found) fail(ErrorKind::NoReturn, "no return to the section within time " + std::to_string(opt.max_time));
    if (std::abs(nrm.dot(field.eval(y_hit))) < 1e-8 * field.eval(y_hit).norm())
      fail(ErrorKind::TangentialCrossing, "return crossing is tangent to the section");
    period = t_hit;
    if (opt.closure) {
      closure = *opt.closure;
    } else {
      Vec shift = Vec::Zero(dim);
      const Vec raw = y_hit - p;
      for (const auto& pc : field.periodic) shift(pc.index) = pc.period * std::round(raw(pc.index) / pc.period);
      closure = Closure::lattice(shift);
    }
  }

  const int rows = dim + 1 + static_cast<int>(targets.size());
  auto residual = [&](const Vec& zz, double tt, Mat* jac, Mat* mono) {
    Vec r(rows);
    Vec end;
    if (jac) {
      FlowWithMonodromy fm = integrate_with_monodromy(field, zz, tt, opt.integration_tol);
      end = fm.end;
      if (mono) *mono = fm.monodromy;
      jac->setZero(rows, dim + 1);
      jac->topLeftCorner(dim, dim) = fm.monodromy - closure.jacobian(zz);
      jac->block(0, dim, dim, 1) = field.eval(end);
      jac->block(dim, 0, 1, dim) = nrm.transpose();
      for (std::size_t k = 0; k < targets.size(); ++k)
        jac->block(dim + 1 + static_cast<int>(k), 0, 1, dim) = field.integrals[k].gradient(zz).transpose();
    } else {
      IntegratorOptions iopt;
      iopt.tol = opt.integration_tol;
      StepStats stats;
      end = integrate_adaptive(field.eval, zz, 0.0, tt, iopt, stats).y;
    }
    r.head(dim) = end - closure.apply(zz);
    r(dim) = nrm.dot(zz - p);
    for (std::size_t k = 0; k < targets.size(); ++k)
      r(dim + 1 + static_cast<int>(k)) = field.integrals[k].value(zz) - targets[k];
    return r;
  };

  Mat jac, mono;
  Vec r = residual(z, period, &jac, &mono);
  double rn = max_norm(r);
  int it = 0;
  int stagnant = 0;
  while (rn >= opt.tol && it < opt.max_newton) {
    ++it;
    Eigen::CompleteOrthogonalDecomposition<Mat> cod(jac);
    const Vec step = -cod.solve(r);
    double lambda = 1.0;
    Vec z_new;
    double t_new = period;
    double rn_new = std::numeric_limits<double>::infinity();
    for (int halving = 0; halving <= 8; ++halving) {
      z_new = z + lambda * step.head(dim);
      t_new = period + lambda * step(dim);
      if (t_new > 0) {
        try {
          rn_new = max_norm(residual(z_new, t_new, nullptr, nullptr));
        } catch (const Error&) {
          rn_new = std::numeric_limits<double>::infinity();
        }
      }
      if (rn_new < rn) break;
      lambda /= 2;
    }
    if (!(rn_new < rn)) {
      if (++stagnant >= 2) break;
      continue;
    }
    stagnant = 0;
    z = z_new;
    period = t_new;
    r = residual(z, period, &jac, &mono);
    rn = max_norm(r);
  }
  if (!(rn < opt.tol) && !(rn < opt.accept_tol))
    fail(ErrorKind::NewtonDiverged, "shooting residual " + std::to_string(rn) + " after " + std::to_string(it) +
                                        " iterations");

  ClosedOrbitRecord rec;
  rec.start = z;
  rec.period = period;
  rec.closure = closure;
  rec.residual = rn;
  rec.newton_iterations = it;
  rec.monodromy = closure.jacobian(z).lu().solve(mono);
  rec.monodromy_det = rec.monodromy.determinant();
  TransverseSpectrum ts = transverse_spectrum(field, z, rec.monodromy);
  rec.return_map = ts.return_map;
  rec.transverse_basis = ts.basis;
  rec.multipliers = ts.multipliers;
  rec.flow_defect = ts.flow_defect;
  rec.monodromy_det = ts.restricted_det;

  if (!closure.deck) {
    FreeHomotopyClass c;
    for (const auto& pc : field.periodic) c.lattice.push_back(std::lround(closure.shift(pc.index) / pc.period));
    rec.cls = c;
  }

  // uniform samples over one period
  const int k = std::max(8, opt.loop_samples);
  rec.loop.reserve(static_cast<std::size_t>(k));
  IntegratorOptions iopt;
  iopt.tol = opt.integration_tol;
  Vec y = z;
  for (int i = 0; i < k; ++i) {
    rec.loop.push_back(y);
    rec.loop_velocity.push_back(field.eval(y));
    if (i + 1 < k) {
      StepStats stats;
      y = integrate_adaptive(field.eval, y, period * i / k, period * (i + 1) / k, iopt, stats).y;
    }
  }

  bool degenerate = false;
  const int idx = index_from_return_map(rec.return_map, opt.convention, degenerate);
  if (!degenerate) rec.index = idx;
  try {
    rec.multiplicity = multiplicity(rec);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::AmbiguousMultiplicity) throw;
    rec.multiplicity = 1;
  }
  return rec;
}

// ---------------------------------------------------------------------------

int planar_degree(const std::function<Eigen::Vector2d(const Eigen::Vector2d&)>& phi, double r, int samples) {
  auto value = [&](double th) {
    Eigen::Vector2d p = phi(Eigen::Vector2d(r * std::cos(th), r * std::sin(th)));
    if (!(p.norm() > 0)) fail(ErrorKind::IndexUndefined, "fixed point on the test circle");
    return std::atan2(p(1), p(0));
  };
  auto wrap = [](double d) {
    while (d > std::numbers::pi) d -= 2 * std::numbers::pi;
    while (d <= -std::numbers::pi) d += 2 * std::numbers::pi;
    return d;
  };
  std::function<double(double, double, double, double, int)> sweep = [&](double a, double fa, double b, double fb,
                                                                          int depth) -> double {
    const double d = wrap(fb - fa);
    if (std::abs(d) < std::numbers::pi / 4 || depth > 40) return d;
    const double m = 0.5 * (a + b);
    const double fm = value(m);
    return sweep(a, fa, m, fm, depth + 1) + sweep(m, fm, b, fb, depth + 1);
  };
  const int n = std::max(samples, 8);
  double total = 0.0;
  double th0 = 0.0, f0 = value(0.0);
  const double first = f0;
  for (int i = 1; i <= n; ++i) {
    const double th = 2 * std::numbers::pi * i / n;
    const double f = i == n ? first : value(th);
    total += sweep(th0, f0, th, f, 0);
    th0 = th;
    f0 = f;
  }
  return static_cast<int>(std::lround(total / (2 * std::numbers::pi)));
}

int fixed_point_index(const ClosedOrbitRecord& orbit, const IndexConvention& convention, const VectorFieldSpec* field) {
  bool degenerate = false;
  const int idx = index_from_return_map(orbit.return_map, convention, degenerate);
  if (!degenerate) return idx;
  const int d = orbit.section_dim();
  if (d > 2) fail(ErrorKind::DegenerateUnsupported, "degenerate return map in section dimension " + std::to_string(d));
  if (d < 2 || !field) fail(ErrorKind::IndexUndefined, "degenerate orbit without a degree fallback");

  // x - P(x) on a small circle of the section, P the nonlinear return map
  const Vec z0 = orbit.start;
  const Vec nrm = field->eval(z0).normalized();
  const Mat& b = orbit.transverse_basis;
  auto project = [&](Vec z) {
    for (int it = 0; it < 5; ++it)
      for (const auto& integral : field->integrals) {
        const Vec g = integral.gradient(z);
        z -= (integral.value(z) - integral.value(z0)) / g.squaredNorm() * g;
      }
    return z;
  };
  IntegratorOptions iopt;
  iopt.tol = 1e-12;
  auto ret = [&](const Eigen::Vector2d& xi) -> Eigen::Vector2d {
    const Vec z = project(z0 + b * xi);
    Vec hit;
    bool found = false;
    StepStats stats;
    const double tmax = 1.5 * orbit.period;
    integrate_adaptive(field->eval, z, 0.0, tmax, iopt, stats, [&](double t0, const Vec& y0, double t1, const Vec& y1) {
      if (t1 < 0.5 * orbit.period) return true;
      const double g0 = nrm.dot(orbit.closure.apply_inverse(y0) - z0);
      const double g1 = nrm.dot(orbit.closure.apply_inverse(y1) - z0);
      if (g0 < 0 && g1 >= 0) {
        const double s = g0 / (g0 - g1);
        hit = orbit.closure.apply_inverse(y0 + s * (y1 - y0));
        found = true;
        (void)t0;
        return false;
      }
      return true;
    });
    if (!found) fail(ErrorKind::IndexUndefined, "no return near the degenerate orbit");
    const Eigen::Vector2d p = b.transpose() * (hit - z0);
    return xi - p;
  };
  const double radius = 1e-3;
  const int deg = planar_degree(ret, radius, 720);
  return convention.sigma * deg;
}

Vec loop_at(const ClosedOrbitRecord& orbit, double tau) {
  const double t = orbit.period;
  const int k = static_cast<int>(orbit.loop.size());
  const double wraps = std::floor(tau / t);
  double r = tau - wraps * t;
  const double h = t / k;
  int i = std::min(k - 1, static_cast<int>(std::floor(r / h)));
  const double s = (r - i * h) / h;
  const Vec& p0 = orbit.loop[static_cast<std::size_t>(i)];
  const Vec m0 = orbit.loop_velocity[static_cast<std::size_t>(i)] * h;
  Vec p1, m1;
  if (i + 1 < k) {
    p1 = orbit.loop[static_cast<std::size_t>(i + 1)];
    m1 = orbit.loop_velocity[static_cast<std::size_t>(i + 1)] * h;
  } else {
    p1 = orbit.closure.apply(orbit.loop[0]);
    m1 = orbit.closure.jacobian(orbit.loop[0]) * orbit.loop_velocity[0] * h;
  }
  const double s2 = s * s, s3 = s2 * s;
  Vec out = (2 * s3 - 3 * s2 + 1) * p0 + (s3 - 2 * s2 + s) * m0 + (-2 * s3 + 3 * s2) * p1 + (s3 - s2) * m1;
  const int w = static_cast<int>(wraps);
  if (w == 0) return out;
  const Closure c = orbit.closure.power(std::abs(w));
  return w > 0 ? c.apply(out) : c.apply_inverse(out);
}

namespace {

// loop(t + T/n) = target(loop(t)) on the samples
bool shift_invariant(const ClosedOrbitRecord& orbit, int n, const std::function<Vec(const Vec&)>& target) {
  const double dt = orbit.period / n;
  const int k = static_cast<int>(orbit.loop.size());
  const int stride = std::max(1, k / 64);
  for (int i = 0; i < k; i += stride) {
    const Vec& a = orbit.loop[static_cast<std::size_t>(i)];
    const Vec b = loop_at(orbit, orbit.period * i / k + dt);
    if (max_norm(b - target(a)) > 1e-6 * std::max(1.0, max_norm(a))) return false;
  }
  return true;
}

}  // namespace

int multiplicity(const ClosedOrbitRecord& orbit) {
  if (!(orbit.residual < 1e-8)) fail(ErrorKind::InvalidInput, "orbit residual too large");
  int found = 1;
  const Closure& c = orbit.closure;
  if (c.deck) {
    const int big = c.root_deck ? c.root_power : 1;
    for (int n = big; n >= 2; --n) {
      if (big % n) continue;
      const ClassDeck d = c.root_deck->power(big / n);
      if (shift_invariant(orbit, n, [&](const Vec& z) { return Vec(d.apply_phase<double>(z)); })) {
        found = n;
        break;
      }
    }
  } else {
    long g = 0;
    if (!orbit.cls.is_word)
      for (long w : orbit.cls.lattice) g = std::gcd(g, std::labs(w));
    const int nmax = g > 0 ? static_cast<int>(g) : 12;
    for (int n = nmax; n >= 2; --n) {
      if (g > 0 && g % n) continue;
      const Vec step = c.shift / n;
      if (shift_invariant(orbit, n, [&](const Vec& z) { return Vec(z + step); })) {
        found = n;
        break;
      }
    }
  }
  if (!orbit.cls.constant()) {
    const int from_class = power_decomposition(orbit.cls).n;
    if (from_class != found)
      fail(ErrorKind::AmbiguousMultiplicity, "loop shift gives " + std::to_string(found) + ", class power gives " +
                                                 std::to_string(from_class));
  }
  return found;
}

ClosedOrbitRecord cover(const ClosedOrbitRecord& orbit, int n, const IndexConvention& convention) {
  if (n < 1) fail(ErrorKind::InvalidInput, "cover degree must be positive");
  ClosedOrbitRecord c = orbit;
  c.period = orbit.period * n;
  c.closure = orbit.closure.power(n);
  const int k = static_cast<int>(orbit.loop.size());
  c.loop.clear();
  c.loop_velocity.clear();
  for (int j = 0; j < n; ++j) {
    const Closure cj = orbit.closure.power(j);
    for (int i = 0; i < k; ++i) {
      const Vec& z = orbit.loop[static_cast<std::size_t>(i)];
      c.loop.push_back(j == 0 ? z : cj.apply(z));
      c.loop_velocity.push_back(j == 0 ? orbit.loop_velocity[static_cast<std::size_t>(i)]
                                       : Vec(cj.jacobian(z) * orbit.loop_velocity[static_cast<std::size_t>(i)]));
    }
  }
  Mat m = Mat::Identity(orbit.monodromy.rows(), orbit.monodromy.cols());
  Mat p = Mat::Identity(orbit.return_map.rows(), orbit.return_map.cols());
  for (int j = 0; j < n; ++j) {
    m = m * orbit.monodromy;
    p = p * orbit.return_map;
  }
  c.monodromy = m;
  c.return_map = p;
  c.monodromy_det = std::pow(orbit.monodromy_det, n);
  c.multipliers.clear();
  for (auto l : orbit.multipliers) c.multipliers.push_back(std::pow(l, n));
  if (!orbit.cls.constant()) {
    const bool lifted = orbit.cls.lifted;
    c.cls = class_power(orbit.cls, n);
    c.cls.lifted = lifted;
  }
  bool degenerate = false;
  const int idx = index_from_return_map(p, convention, degenerate);
  c.index = degenerate ? std::nullopt : std::optional<int>(idx);
  c.multiplicity = multiplicity(c);
  return c;
}

// ---------------------------------------------------------------------------

double loop_distance(const ClosedOrbitRecord& a, const ClosedOrbitRecord& b, const std::vector<PeriodicCoord>& periodic) {
  const double tmax = std::max(a.period, b.period);
  if (std::abs(a.period - b.period) > 1e-6 * tmax) return std::numeric_limits<double>::infinity();
  const Vec& a0 = a.loop.front();
  const int kb = static_cast<int>(b.loop.size());
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int j = 0; j < kb; ++j) {
    const double d = wrap_difference(a0 - b.loop[static_cast<std::size_t>(j)], periodic).norm();
    if (d < best_d) {
      best_d = d;
      best = j;
    }
  }
  const double h = b.period / kb;
  double lo = best * h - h, hi = best * h + h;
  auto dist = [&](double s) { return wrap_difference(a0 - loop_at(b, s), periodic).norm(); };
  const double gr = (std::sqrt(5.0) - 1) / 2;
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double d1 = dist(x1), d2 = dist(x2);
  for (int it = 0; it < 80; ++it) {
    if (d1 < d2) {
      hi = x2;
      x2 = x1;
      d2 = d1;
      x1 = hi - gr * (hi - lo);
      d1 = dist(x1);
    } else {
      lo = x1;
      x1 = x2;
      d1 = d2;
      x2 = lo + gr * (hi - lo);
      d2 = dist(x2);
    }
  }
  const double shift = 0.5 * (lo + hi);
  double worst = 0.0;
  const int ka = static_cast<int>(a.loop.size());
  for (int i = 0; i < ka; ++i) {
    const Vec d = wrap_difference(a.loop[static_cast<std::size_t>(i)] - loop_at(b, a.period * i / ka + shift), periodic);
    worst = std::max(worst, max_norm(d));
  }
  return worst;
}

std::vector<ClosedOrbitRecord> s1_dedupe(const std::vector<ClosedOrbitRecord>& orbits,
                                         const std::vector<PeriodicCoord>& periodic, double tol) {
  std::vector<ClosedOrbitRecord> out;
  for (const auto& o : orbits) {
    bool seen = false;
    for (const auto& kept : out)
      if (loop_distance(kept, o, periodic) < tol) {
        seen = true;
        break;
      }
    if (!seen) out.push_back(o);
  }
  return out;
}

FullerIndexResult fuller_index(const std::vector<ClosedOrbitRecord>& orbits, const FreeHomotopyClass& cls,
                               const IndexConvention& convention) {
  FullerIndexResult res;
  res.value = Rational(0);
  res.convention = convention.id;
  for (std::size_t k = 0; k < orbits.size(); ++k) {
    const auto& o = orbits[k];
    if (!o.index) fail(ErrorKind::IndexUndefined, "orbit " + std::to_string(k) + " is degenerate");
    FreeHomotopyClass a = o.cls, b = cls;
    a.lifted = b.lifted = false;
    if (!(o.cls.lattice.empty() && o.cls.word.empty()) && !(a == b))
      fail(ErrorKind::InvalidInput, "orbit " + std::to_string(k) + " lies in class " + to_string(o.cls) +
                                        ", expected " + to_string(cls));
    res.value += Rational(*o.index, o.multiplicity);
    res.contributions.push_back({k, *o.index, o.multiplicity});
  }
  return res;
}

std::string orbit_json(const ClosedOrbitRecord& orbit) {
  nlohmann::ordered_json j;
  j["period"] = orbit.period;
  j["multiplicity"] = orbit.multiplicity;
  nlohmann::json mult = nlohmann::json::array();
  for (auto l : orbit.multipliers) mult.push_back({l.real(), l.imag()});
  j["multipliers"] = mult;
  if (orbit.index)
    j["index"] = *orbit.index;
  else
    j["index"] = "degenerate";
  j["residual"] = orbit.residual;
  j["class"] = to_string(orbit.cls);
  return j.dump();
}

}  // namespace fuller
