#include "fuller/flows.hpp"

#include <random>

namespace fuller {

Mat finite_difference_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& z, double rel_step) {
  const int n = static_cast<int>(z.size());
  Mat j;
  for (int i = 0; i < n; ++i) {
    const double h = rel_step * std::max(1.0, std::abs(z(i)));
    Vec zp = z, zm = z;
    zp(i) += h;
    zm(i) -= h;
    Vec col = (f(zp) - f(zm)) / (2 * h);
    if (i == 0) j.resize(col.size(), n);
    j.col(i) = col;
  }
  return j;
}

Mat VectorFieldSpec::jacobian_at(const Vec& z) const {
  if (jacobian) return jacobian(z);
  return finite_difference_jacobian(eval, z);
}

std::pair<double, long> reduce_angle(double x, double period) {
  double k = std::floor(x / period);
  double r = x - k * period;
  if (period - r < 1e-12 * period) {
    k += 1;
    r = 0.0;
  }
  return {r, static_cast<long>(k)};
}

Trajectory integrate_flow(const VectorFieldSpec& field, const Vec& x0, double T, double tol) {
  if (!(T > 0)) fail(ErrorKind::InvalidInput, "integration time must be positive");
  if (!(tol > 0)) fail(ErrorKind::InvalidInput, "tolerance must be positive");
  Trajectory tr;
  tr.tol = tol;
  auto reduced = [&](const Vec& z) {
    Vec r = z;
    for (const auto& p : field.periodic) r(p.index) = reduce_angle(z(p.index), p.period).first;
    return r;
  };
  tr.times.push_back(0.0);
  tr.states.push_back(reduced(x0));
  IntegratorOptions opt;
  opt.tol = tol;
  auto end = integrate_adaptive(field.eval, x0, 0.0, T, opt, tr.stats,
                                [&](double, const Vec&, double t, const Vec& y) {
                                  tr.times.push_back(t);
                                  tr.states.push_back(reduced(y));
                                  return true;
                                });
  tr.end_unwrapped = end.y;
  for (const auto& p : field.periodic) {
    const long k1 = reduce_angle(end.y(p.index), p.period).second;
    const long k0 = reduce_angle(x0(p.index), p.period).second;
    tr.winding.push_back(k1 - k0);
  }
  return tr;
}

FlowWithMonodromy integrate_with_monodromy(const VectorFieldSpec& field, const Vec& x0, double T, double tol) {
  if (!(T > 0)) fail(ErrorKind::InvalidInput, "integration time must be positive");
  const int n = static_cast<int>(x0.size());
  Vec y(n + n * n);
  y.head(n) = x0;
  Eigen::Map<Mat>(y.data() + n, n, n).setIdentity();
  auto rhs = [&](const Vec& s) {
    Vec out(n + n * n);
    const Vec z = s.head(n);
    out.head(n) = field.eval(z);
    const Mat j = field.jacobian_at(z);
    Eigen::Map<Mat>(out.data() + n, n, n) = j * Eigen::Map<const Mat>(s.data() + n, n, n);
    return out;
  };
  IntegratorOptions opt;
  opt.tol = tol;
  FlowWithMonodromy r;
  auto end = integrate_adaptive(rhs, y, 0.0, T, opt, r.stats);
  r.end = end.y.head(n);
  r.monodromy = Eigen::Map<const Mat>(end.y.data() + n, n, n);
  return r;
}

// ---------------------------------------------------------------------------

namespace {

VecX<Ad2> seed_pair(const Vec& x, const Vec& v) {
  const int n = static_cast<int>(x.size());
  const int m = 2 * n;
  VecX<Ad2> out(m);
  for (int i = 0; i < m; ++i) {
    const double val = i < n ? x(i) : v(i - n);
    out(i).value() = Ad1(val, Vec::Unit(m, i));
    out(i).derivatives().resize(m);
    for (int j = 0; j < m; ++j) out(i).derivatives()(j) = Ad1(i == j ? 1.0 : 0.0, Vec::Zero(m));
  }
  return out;
}

// Value, gradient and Hessian of E = F^2/2 in (x, v).
struct LagrangianJet {
  double e = 0.0;
  Vec grad;
  Mat hess;
};

LagrangianJet finsler_jet(const MetricSpec& metric, const Vec& x, const Vec& v) {
  const int n = static_cast<int>(x.size());
  VecX<Ad2> z = seed_pair(x, v);
  const Ad2 f = metric.norm<Ad2>(VecX<Ad2>(z.head(n)), VecX<Ad2>(z.tail(n)));
  const Ad2 e = f * f * 0.5;
  LagrangianJet jet;
  jet.e = e.value().value();
  jet.grad = e.value().derivatives();
  jet.hess.resize(2 * n, 2 * n);
  for (int i = 0; i < 2 * n; ++i) jet.hess.row(i) = e.derivatives()(i).derivatives().transpose();
  return jet;
}

Vec riemannian_acceleration(const MetricJet& jet, const Vec& v, Vec* c_out = nullptr) {
  const int n = static_cast<int>(v.size());
  Vec c = Vec::Zero(n);
  for (int i = 0; i < n; ++i) c += v(i) * (jet.dg[static_cast<std::size_t>(i)] * v);
  for (int m = 0; m < n; ++m) c(m) -= 0.5 * v.dot(jet.dg[static_cast<std::size_t>(m)] * v);
  if (c_out) *c_out = c;
  return -jet.g.ldlt().solve(c);
}

}  // namespace

GeodesicFlowField geodesic_field(const MetricSpec& metric, const ModelSpace& model) {
  GeodesicFlowField flow;
  flow.metric = metric;
  flow.model = model;
  const int n = metric.dim;
  if (n != model.dim) fail(ErrorKind::InvalidInput, "metric and model dimensions differ");
  flow.base_dim = n;
  VectorFieldSpec& f = flow.field;
  f.phase_dim = 2 * n;
  f.periodic = periodic_coords(model);

  if (metric.kind == MetricKind::Riemannian) {
    f.eval = [metric, n](const Vec& z) {
      const Vec x = z.head(n), v = z.tail(n);
      MetricJet jet = metric_jet(metric, x, 1);
      Vec out(2 * n);
      out.head(n) = v;
      out.tail(n) = riemannian_acceleration(jet, v);
      return out;
    };
    f.jacobian = [metric, n](const Vec& z) {
      const Vec x = z.head(n), v = z.tail(n);
      MetricJet jet = metric_jet(metric, x, 2);
      Vec c;
      riemannian_acceleration(jet, v, &c);
      const Mat ginv = jet.g.inverse();
      Mat j = Mat::Zero(2 * n, 2 * n);
      j.block(0, n, n, n).setIdentity();
      Mat cv(n, n);
      for (int m = 0; m < n; ++m)
        for (int l = 0; l < n; ++l) {
          double s = (jet.dg[static_cast<std::size_t>(l)] * v)(m) - (jet.dg[static_cast<std::size_t>(m)] * v)(l);
          for (int i = 0; i < n; ++i) s += v(i) * jet.dg[static_cast<std::size_t>(i)](m, l);
          cv(m, l) = s;
        }
      j.block(n, n, n, n) = -ginv * cv;
      for (int l = 0; l < n; ++l) {
        const auto L = static_cast<std::size_t>(l);
        Vec cx = Vec::Zero(n);
        for (int i = 0; i < n; ++i) cx += v(i) * (jet.d2g[static_cast<std::size_t>(i)][L] * v);
        for (int m = 0; m < n; ++m) cx(m) -= 0.5 * v.dot(jet.d2g[static_cast<std::size_t>(m)][L] * v);
        j.block(n, l, n, 1) = ginv * jet.dg[L] * ginv * c - ginv * cx;
      }
      return j;
    };
    f.integrals.push_back(FirstIntegral{
        [metric, n](const Vec& z) {
          const Vec x = z.head(n), v = z.tail(n);
          return 0.5 * v.dot(metric.tensor<double>(x) * v);
        },
        [metric, n](const Vec& z) {
          const Vec x = z.head(n), v = z.tail(n);
          MetricJet jet = metric_jet(metric, x, 1);
          Vec g(2 * n);
          for (int k = 0; k < n; ++k) g(k) = 0.5 * v.dot(jet.dg[static_cast<std::size_t>(k)] * v);
          g.tail(n) = jet.g * v;
          return g;
        }});
  } else {
    f.eval = [metric, n](const Vec& z) {
      const Vec x = z.head(n), v = z.tail(n);
      LagrangianJet jet = finsler_jet(metric, x, v);
      const Mat evv = jet.hess.bottomRightCorner(n, n);
      const Mat evx = jet.hess.bottomLeftCorner(n, n);
      Eigen::SelfAdjointEigenSolver<Mat> es(evv);
      const Vec ev = es.eigenvalues().cwiseAbs();
      if (!(ev.minCoeff() > 1e-12 * std::max(1.0, ev.maxCoeff())))
        fail(ErrorKind::DegenerateFinslerHessian, "fiber Hessian of F^2/2 is singular");
      Vec out(2 * n);
      out.head(n) = v;
      out.tail(n) = evv.ldlt().solve(Vec(jet.grad.head(n) - evx * v));
      return out;
    };
    f.integrals.push_back(FirstIntegral{
        [metric, n](const Vec& z) {
          const double F = metric.norm<double>(Vec(z.head(n)), Vec(z.tail(n)));
          return 0.5 * F * F;
        },
        [metric, n](const Vec& z) { return finsler_jet(metric, Vec(z.head(n)), Vec(z.tail(n))).grad; }});
  }
  return flow;
}

double GeodesicFlowField::contact_form(const Vec& z, const Vec& w) const {
  const int n = base_dim;
  const Vec grad = field.integrals.at(0).gradient(z);
  return grad.tail(n).dot(w.head(n));
}

double GeodesicFlowField::speed(const Vec& z) const {
  const int n = base_dim;
  return metric.norm<double>(Vec(z.head(n)), Vec(z.tail(n)));
}

Vec GeodesicFlowField::unit_phase_point(const Vec& x, const Vec& direction) const {
  const double s = metric.norm<double>(x, direction);
  if (!(s > 0)) fail(ErrorKind::InvalidInput, "zero direction");
  Vec z(2 * base_dim);
  z.head(base_dim) = x;
  z.tail(base_dim) = direction / s;
  return z;
}

ReebReport reeb_conditions_check(const GeodesicFlowField& flow, int n_samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  const int n = flow.base_dim;
  const FirstIntegral& energy = flow.field.integrals.at(0);
  // a(z) = d_v(F^2/2), the coefficients of lambda in dx
  auto coeffs = [&](const Vec& z) { return Vec(energy.gradient(z).tail(n)); };
  ReebReport rep;
  rep.samples = n_samples;
  for (int s = 0; s < n_samples; ++s) {
    Vec dir(n);
    for (int i = 0; i < n; ++i) dir(i) = gauss(rng);
    const Vec z = flow.unit_phase_point(sample_point(flow.model, rng), dir);
    const Vec r = flow.field.eval(z);
    rep.max_lambda_deviation = std::max(rep.max_lambda_deviation, std::abs(flow.contact_form(z, r) - 1.0));
    const Mat a = finite_difference_jacobian(coeffs, z, 1e-5);
    const Vec grad_e = energy.gradient(z);
    for (int k = 0; k < 4; ++k) {
      Vec w(2 * n);
      for (int i = 0; i < 2 * n; ++i) w(i) = gauss(rng);
      w -= (grad_e.dot(w) / grad_e.squaredNorm()) * grad_e;
      w.normalize();
      const double dl = (a * r).dot(w.head(n)) - (a * w).dot(r.head(n));
      rep.max_dlambda = std::max(rep.max_dlambda, std::abs(dl));
    }
  }
  return rep;
}

}  // namespace fuller
