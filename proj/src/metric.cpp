#include <cmath>

#include "fuller/models.hpp"

namespace fuller {

namespace {

VecX<Ad2> seed_second_order(const Vec& x) {
  const int n = static_cast<int>(x.size());
  VecX<Ad2> out(n);
  for (int i = 0; i < n; ++i) {
    out(i).value() = Ad1(x(i), Vec::Unit(n, i));
    out(i).derivatives().resize(n);
    for (int j = 0; j < n; ++j) out(i).derivatives()(j) = Ad1(i == j ? 1.0 : 0.0, Vec::Zero(n));
  }
  return out;
}

struct BumpField {
  std::vector<Bump> bumps;
  bool periodic = false;
  Mat gram;       // physical inner product in chart coordinates
  double reach = 0.0;  // coordinate bound of |x - c - k| for a hit

  template <class S>
  S operator()(const VecX<S>& x) const {
    S psi(1.0);
    const int n = static_cast<int>(x.size());
    for (const Bump& b : bumps) {
      const double r2max = b.radius * b.radius;
      auto add = [&](const Vec& k) {
        VecX<S> d(n);
        for (int i = 0; i < n; ++i) d(i) = x(i) - (b.center(i) + k(i));
        Vec dp(n);
        for (int i = 0; i < n; ++i) dp(i) = primal(d(i));
        if (dp.dot(gram * dp) >= r2max) return;
        S r2 = d.dot(gram.cast<S>() * d);
        S q = S(1.0) - r2 / r2max;
        psi += b.amplitude * q * q * q;
      };
      if (!periodic) {
        add(Vec::Zero(n));
        continue;
      }
      const double span = b.radius * reach;
      Eigen::VectorXi lo(n), hi(n);
      for (int i = 0; i < n; ++i) {
        const double off = primal(x(i)) - b.center(i);
        lo(i) = static_cast<int>(std::floor(off - span));
        hi(i) = static_cast<int>(std::ceil(off + span));
      }
      Eigen::VectorXi k = lo;
      while (true) {
        add(k.cast<double>());
        int i = 0;
        while (i < n && ++k(i) > hi(i)) {
          k(i) = lo(i);
          ++i;
        }
        if (i == n) break;
      }
    }
    return psi;
  }
};

BumpField make_bumps(const ModelSpace& model, const std::vector<Bump>& bumps) {
  BumpField f;
  f.bumps = bumps;
  for (const Bump& b : bumps) {
    if (b.center.size() != model.dim) fail(ErrorKind::InvalidInput, "bump center has wrong dimension");
    if (b.radius <= 0) fail(ErrorKind::InvalidInput, "bump radius must be positive");
  }
  const bool flat = model.kind == ModelKind::FlatTorus ||
                    (model.kind == ModelKind::Product && model.factors[0].kind == ModelKind::FlatTorus &&
                     model.factors[1].kind == ModelKind::FlatTorus);
  f.periodic = flat;
  if (flat) {
    Mat b = Mat::Zero(model.dim, model.dim);
    if (model.kind == ModelKind::FlatTorus) {
      b = model.basis;
    } else {
      const int n0 = model.factors[0].dim;
      b.topLeftCorner(n0, n0) = model.factors[0].basis;
      b.bottomRightCorner(model.dim - n0, model.dim - n0) = model.factors[1].basis;
    }
    f.gram = b * b.transpose();
    f.reach = b.transpose().inverse().norm();
  } else {
    f.gram = Mat::Identity(model.dim, model.dim);
  }
  return f;
}

MetricSpec base_metric(const ModelSpace& model) {
  switch (model.kind) {
    case ModelKind::FlatTorus: {
      Mat gram = model.basis * model.basis.transpose();
      return MetricSpec::riemannian(
          model.dim,
          [gram](const auto& x) {
            using S = typename std::decay_t<decltype(x)>::Scalar;
            return MatX<S>(gram.cast<S>());
          },
          "flat");
    }
    case ModelKind::FuchsianSurface: {
      auto m = MetricSpec::riemannian(
          2,
          [](const auto& x) {
            using S = typename std::decay_t<decltype(x)>::Scalar;
            MatX<S> g = MatX<S>::Zero(2, 2);
            const S w = S(1.0) / (x(1) * x(1));
            g(0, 0) = w;
            g(1, 1) = w;
            return g;
          },
          "hyperbolic upper half plane");
      m.set_distance([](const auto& a, const auto& b) {
        using S = typename std::decay_t<decltype(a)>::Scalar;
        using std::log;
        using std::sqrt;
        const S dx = a(0) - b(0), dy = a(1) - b(1);
        const S u = sqrt((dx * dx + dy * dy) / (S(4.0) * a(1) * b(1)));
        const S d = S(2.0) * log(u + sqrt(S(1.0) + u * u));
        return S(d * d);
      });
      return m;
    }
    case ModelKind::WarpedCylinder: {
      WarpProfile w = model.warp;
      return MetricSpec::riemannian(
          2,
          [w](const auto& x) {
            using S = typename std::decay_t<decltype(x)>::Scalar;
            MatX<S> g = MatX<S>::Zero(2, 2);
            const S f = w(x(0));
            g(0, 0) = S(1.0);
            g(1, 1) = f * f;
            return g;
          },
          "warped");
    }
    case ModelKind::Product: {
      MetricSpec a = base_metric(model.factors[0]);
      MetricSpec b = base_metric(model.factors[1]);
      const int n0 = a.dim, n1 = b.dim;
      return MetricSpec::riemannian(
          n0 + n1,
          [a, b, n0, n1](const auto& x) {
            using S = typename std::decay_t<decltype(x)>::Scalar;
            MatX<S> g = MatX<S>::Zero(n0 + n1, n0 + n1);
            g.topLeftCorner(n0, n0) = a.tensor<S>(VecX<S>(x.head(n0)));
            g.bottomRightCorner(n1, n1) = b.tensor<S>(VecX<S>(x.tail(n1)));
            return g;
          },
          "product");
    }
    case ModelKind::MappingTorus: break;
  }
  fail(ErrorKind::UnsupportedModel, "no standard metric on " + model.describe());
}

}  // namespace

MetricJet metric_jet(const MetricSpec& metric, const Vec& x, int order) {
  const int n = static_cast<int>(x.size());
  MetricJet jet;
  if (order <= 0) {
    jet.g = metric.tensor<double>(x);
    return jet;
  }
  if (order == 1) {
    VecX<Ad1> xa(n);
    for (int i = 0; i < n; ++i) xa(i) = Ad1(x(i), Vec::Unit(n, i));
    MatX<Ad1> g = metric.tensor<Ad1>(xa);
    jet.g.resize(n, n);
    jet.dg.assign(static_cast<std::size_t>(n), Mat::Zero(n, n));
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) {
        jet.g(r, c) = g(r, c).value();
        const Vec& d = g(r, c).derivatives();
        for (int k = 0; k < d.size(); ++k) jet.dg[static_cast<std::size_t>(k)](r, c) = d(k);
      }
    return jet;
  }
  MatX<Ad2> g = metric.tensor<Ad2>(seed_second_order(x));
  jet.g.resize(n, n);
  jet.dg.assign(static_cast<std::size_t>(n), Mat::Zero(n, n));
  jet.d2g.assign(static_cast<std::size_t>(n), std::vector<Mat>(static_cast<std::size_t>(n), Mat::Zero(n, n)));
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      const Ad2& e = g(r, c);
      jet.g(r, c) = e.value().value();
      const Vec& d1 = e.value().derivatives();
      for (int k = 0; k < d1.size(); ++k) jet.dg[static_cast<std::size_t>(k)](r, c) = d1(k);
      for (int k = 0; k < e.derivatives().size(); ++k) {
        const Vec& d2 = e.derivatives()(k).derivatives();
        for (int l = 0; l < d2.size(); ++l)
          jet.d2g[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)](r, c) = d2(l);
      }
    }
  return jet;
}

MetricSpec standard_metric(const ModelSpace& model, std::vector<Bump> bumps, double scale) {
  if (scale <= 0) fail(ErrorKind::InvalidInput, "metric scale must be positive");
  MetricSpec base = base_metric(model);
  if (bumps.empty() && scale == 1.0) return base;
  BumpField psi = make_bumps(model, bumps);
  const double s2 = scale * scale;
  MetricSpec m = MetricSpec::riemannian(
      model.dim,
      [base, psi, s2](const auto& x) {
        using S = typename std::decay_t<decltype(x)>::Scalar;
        MatX<S> g = base.tensor<S>(x);
        if (psi.bumps.empty()) return MatX<S>(g * S(s2));
        const S f = psi(x) * s2;
        return MatX<S>(g * f);
      },
      base.description);
  if (bumps.empty() && base.has_exact_distance()) {
    m.set_distance([base, s2](const auto& a, const auto& b) {
      using S = typename std::decay_t<decltype(a)>::Scalar;
      return S(base.squared_distance<S>(a, b) * s2);
    });
  }
  m.bumps = std::move(bumps);
  m.scale = scale;
  return m;
}

MetricSpec randers_metric(const Mat& a, const Vec& b) {
  Eigen::LLT<Mat> llt(a);
  if (llt.info() != Eigen::Success) fail(ErrorKind::InvalidInput, "Randers quadratic part is not positive");
  if (std::sqrt(b.dot(a.inverse() * b)) >= 1.0) fail(ErrorKind::InvalidInput, "Randers drift must have |b| < 1");
  return MetricSpec::finsler(
      static_cast<int>(a.rows()),
      [a, b](const auto&, const auto& v) {
        using S = typename std::decay_t<decltype(v)>::Scalar;
        using std::sqrt;
        return S(sqrt(v.dot(a.cast<S>() * v)) + v.dot(b.cast<S>()));
      },
      "Randers");
}

void validate_metric(const MetricSpec& metric, const ModelSpace& model, int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  for (int s = 0; s < samples; ++s) {
    Vec x = sample_point(model, rng);
    if (metric.kind == MetricKind::Riemannian) {
      Mat g = metric.tensor<double>(x);
      if ((g - g.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + g.cwiseAbs().maxCoeff()))
        fail(ErrorKind::InvalidInput, "metric tensor is not symmetric");
      const double lmin = Eigen::SelfAdjointEigenSolver<Mat>(g).eigenvalues().minCoeff();
      if (!(lmin > 1e-12)) fail(ErrorKind::InvalidInput, "metric tensor not positive definite");
    } else {
      Vec v(metric.dim);
      for (int i = 0; i < v.size(); ++i) v(i) = gauss(rng);
      const double f = metric.norm<double>(x, v);
      if (!(f > 0)) fail(ErrorKind::InvalidInput, "Finsler norm not positive");
      const double lambda = 0.1 + 3.0 * std::abs(gauss(rng));
      const double fl = metric.norm<double>(x, Vec(lambda * v));
      if (std::abs(fl - lambda * f) > 1e-10 * lambda * f)
        fail(ErrorKind::InvalidInput, "Finsler norm is not positively homogeneous");
    }
  }
}

}  // namespace fuller
