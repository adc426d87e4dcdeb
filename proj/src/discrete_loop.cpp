#include "fuller/discrete_loop.hpp"

#include <cmath>

namespace fuller {

Vec DiscreteLoop::flatten() const {
  const int n = dim();
  Vec out(size() * n);
  for (int k = 0; k < size(); ++k) out.segment(k * n, n) = nodes[static_cast<std::size_t>(k)];
  return out;
}

void DiscreteLoop::assign(const Vec& flat) {
  const int n = dim();
  for (int k = 0; k < size(); ++k) nodes[static_cast<std::size_t>(k)] = flat.segment(k * n, n);
}

Vec DiscreteLoop::node(int k) const {
  const int n = size();
  const int q = static_cast<int>(std::floor(static_cast<double>(k) / n));
  const Vec& x = nodes[static_cast<std::size_t>(k - q * n)];
  if (q == 0) return x;
  return deck.power(q).apply<double>(x);
}

namespace {

template <class S>
S segment_energy(const MetricSpec& metric, const VecX<S>& a, const VecX<S>& b) {
  if (metric.has_exact_distance()) return metric.squared_distance<S>(a, b);
  const VecX<S> d = b - a;
  if (metric.kind == MetricKind::Finsler) {
    const S fa = metric.norm<S>(a, d), fb = metric.norm<S>(b, d);
    return S(0.5) * (fa * fa + fb * fb);
  }
  const MatX<S> g = metric.tensor<S>(a) + metric.tensor<S>(b);
  return S(0.5) * d.dot(g * d);
}

// Segment k joins node k to node k+1; the last one closes through the deck.
template <class S>
S segment_value(const MetricSpec& metric, const DiscreteLoop& loop, int k, const VecX<S>& a, const VecX<S>& c) {
  if (k + 1 < loop.size()) return segment_energy<S>(metric, a, c);
  return segment_energy<S>(metric, a, loop.deck.apply<S>(c));
}

VecX<Ad2> seed_two(const Vec& a, const Vec& c) {
  const int n = static_cast<int>(a.size());
  const int m = 2 * n;
  VecX<Ad2> out(m);
  for (int i = 0; i < m; ++i) {
    const double v = i < n ? a(i) : c(i - n);
    out(i).value() = Ad1(v, Vec::Unit(m, i));
    out(i).derivatives().resize(m);
    for (int j = 0; j < m; ++j) out(i).derivatives()(j) = Ad1(i == j ? 1.0 : 0.0, Vec::Zero(m));
  }
  return out;
}

}  // namespace

double loop_energy(const MetricSpec& metric, const DiscreteLoop& loop) {
  const int n = loop.size();
  double e = 0.0;
  for (int k = 0; k < n; ++k)
    e += segment_value<double>(metric, loop, k, loop.nodes[static_cast<std::size_t>(k)],
                               loop.nodes[static_cast<std::size_t>((k + 1) % n)]);
  return n * e;
}

EnergyDerivatives energy_derivatives(const MetricSpec& metric, const DiscreteLoop& loop, bool hessian) {
  const int n = loop.size();
  const int d = loop.dim();
  EnergyDerivatives out;
  out.gradient = Vec::Zero(n * d);
  if (hessian) out.hessian = Mat::Zero(n * d, n * d);
  for (int k = 0; k < n; ++k) {
    const int kn = (k + 1) % n;
    const Vec& a = loop.nodes[static_cast<std::size_t>(k)];
    const Vec& c = loop.nodes[static_cast<std::size_t>(kn)];
    Vec g;
    Mat h;
    double val;
    if (hessian) {
      const VecX<Ad2> z = seed_two(a, c);
      const Ad2 s = segment_value<Ad2>(metric, loop, k, VecX<Ad2>(z.head(d)), VecX<Ad2>(z.tail(d)));
      val = s.value().value();
      g = s.value().derivatives();
      h.resize(2 * d, 2 * d);
      for (int i = 0; i < 2 * d; ++i) h.row(i) = s.derivatives()(i).derivatives().transpose();
    } else {
      VecX<Ad1> z(2 * d);
      for (int i = 0; i < 2 * d; ++i) z(i) = Ad1(i < d ? a(i) : c(i - d), Vec::Unit(2 * d, i));
      const Ad1 s = segment_value<Ad1>(metric, loop, k, VecX<Ad1>(z.head(d)), VecX<Ad1>(z.tail(d)));
      val = s.value();
      g = s.derivatives();
    }
    out.value += n * val;
    const int idx[2] = {k * d, kn * d};
    for (int p = 0; p < 2; ++p) {
      out.gradient.segment(idx[p], d) += n * g.segment(p * d, d);
      if (hessian)
        for (int q = 0; q < 2; ++q) out.hessian.block(idx[p], idx[q], d, d) += n * h.block(p * d, q * d, d, d);
    }
  }
  return out;
}

std::vector<double> segment_lengths(const MetricSpec& metric, const DiscreteLoop& loop) {
  const int n = loop.size();
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k)
    out[static_cast<std::size_t>(k)] = std::sqrt(std::max(
        0.0, segment_value<double>(metric, loop, k, loop.nodes[static_cast<std::size_t>(k)],
                                   loop.nodes[static_cast<std::size_t>((k + 1) % n)])));
  return out;
}

double loop_length(const MetricSpec& metric, const DiscreteLoop& loop) {
  double l = 0.0;
  for (double s : segment_lengths(metric, loop)) l += s;
  return l;
}

double speed_spread(const MetricSpec& metric, const DiscreteLoop& loop) {
  const auto s = segment_lengths(metric, loop);
  double mean = 0.0;
  for (double v : s) mean += v;
  mean /= static_cast<double>(s.size());
  double worst = 0.0;
  for (double v : s) worst = std::max(worst, std::abs(v / mean - 1.0));
  return worst;
}

DiscreteLoop refine(const DiscreteLoop& loop) {
  DiscreteLoop out = loop;
  out.nodes.clear();
  const int n = loop.size();
  for (int k = 0; k < n; ++k) {
    const Vec a = loop.node(k), b = loop.node(k + 1);
    out.nodes.push_back(a);
    out.nodes.push_back(0.5 * (a + b));
  }
  return out;
}

DescentTrace descend(const MetricSpec& metric, DiscreteLoop& loop, int max_iterations, double rel_gradient_tol) {
  const int n = loop.size();
  const int d = loop.dim();
  // cyclic graph Laplacian plus a small shift, scaled to the energy
  const double tau = 2 * std::acos(-1.0);
  const double eps = (tau / n) * (tau / n);
  Mat lap = Mat::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    lap(k, k) = 2.0 + eps;
    lap(k, (k + 1) % n) -= 1.0;
    lap(k, (k + n - 1) % n) -= 1.0;
  }
  Eigen::LDLT<Mat> pre(lap);
  double gscale = 0.0;
  for (const Vec& x : loop.nodes) {
    gscale += metric.kind == MetricKind::Riemannian ? metric.tensor<double>(x).trace() / d : 1.0;
  }
  gscale /= n;
  auto precondition = [&](const Vec& g) {
    Mat gm = Eigen::Map<const Mat>(g.data(), d, n).transpose();
    Mat sol = pre.solve(gm) / (2.0 * n * gscale);
    Mat back = sol.transpose();
    return Vec(Eigen::Map<const Vec>(back.data(), n * d));
  };

  DescentTrace tr;
  EnergyDerivatives cur = energy_derivatives(metric, loop, false);
  tr.energies.push_back(cur.value);
  const double g0 = cur.gradient.norm();
  for (int it = 0; it < max_iterations; ++it) {
    if (cur.gradient.norm() <= rel_gradient_tol * std::max(1.0, g0)) break;
    const Vec p = precondition(cur.gradient);
    const double slope = cur.gradient.dot(p);
    if (!(slope > 0)) break;
    const Vec x = loop.flatten();
    double alpha = 1.0;
    bool accepted = false;
    for (int bt = 0; bt < 40; ++bt) {
      DiscreteLoop trial = loop;
      trial.assign(x - alpha * p);
      double e;
      try {
        e = loop_energy(metric, trial);
      } catch (const Error&) {
        e = std::numeric_limits<double>::infinity();
      }
      if (std::isfinite(e) && e <= cur.value - 1e-4 * alpha * slope) {
        loop = trial;
        accepted = true;
        break;
      }
      alpha /= 2;
    }
    if (!accepted) break;
    EnergyDerivatives next = energy_derivatives(metric, loop, false);
    if (next.value > cur.value) tr.monotone = false;
    cur = next;
    tr.energies.push_back(cur.value);
    ++tr.iterations;
  }
  return tr;
}

NewtonOutcome newton_refine(const MetricSpec& metric, DiscreteLoop& loop, double tol, int max_iterations) {
  NewtonOutcome out;
  EnergyDerivatives cur = energy_derivatives(metric, loop, true);
  const double scale = std::max(1.0, std::sqrt(std::abs(cur.value)));
  // max over nodes of the metric-dual norm of the per-node gradient
  const int d = loop.dim();
  auto res = [&](const Vec& g, const DiscreteLoop& l) {
    double r = 0.0;
    for (int k = 0; k < l.size(); ++k) {
      const Vec gk = g.segment(k * d, d);
      r = std::max(r, metric.kind == MetricKind::Riemannian
                          ? std::sqrt(gk.dot(metric.tensor<double>(l.nodes[static_cast<std::size_t>(k)]).ldlt().solve(gk)))
                          : gk.norm());
    }
    return r;
  };
  out.residual = res(cur.gradient, loop);
  for (int it = 0; it < max_iterations && out.residual >= tol * scale; ++it) {
    Eigen::SelfAdjointEigenSolver<Mat> es(cur.hessian);
    const Vec& lam = es.eigenvalues();
    const Mat& v = es.eigenvectors();
    const double thr = 1e-9 * lam.cwiseAbs().maxCoeff();
    const Vec coef = v.transpose() * cur.gradient;
    Vec step = Vec::Zero(coef.size());
    for (int i = 0; i < lam.size(); ++i)
      if (std::abs(lam(i)) > thr) step -= (coef(i) / lam(i)) * v.col(i);
    const Vec x = loop.flatten();
    double alpha = 1.0;
    bool accepted = false;
    for (int bt = 0; bt < 12; ++bt) {
      DiscreteLoop trial = loop;
      trial.assign(x + alpha * step);
      try {
        EnergyDerivatives next = energy_derivatives(metric, trial, false);
        if (next.gradient.allFinite() && res(next.gradient, trial) < out.residual) {
          loop = trial;
          accepted = true;
          break;
        }
      } catch (const Error&) {
      }
      alpha /= 2;
    }
    ++out.iterations;
    if (!accepted) break;
    cur = energy_derivatives(metric, loop, true);
    out.residual = res(cur.gradient, loop);
  }
  out.converged = out.residual < tol * scale;
  return out;
}

HessianSpectrum hessian_spectrum(const MetricSpec& metric, const DiscreteLoop& loop, double rel_zero) {
  EnergyDerivatives ed = energy_derivatives(metric, loop, true);
  Eigen::SelfAdjointEigenSolver<Mat> es(ed.hessian, Eigen::EigenvaluesOnly);
  HessianSpectrum hs;
  hs.eigenvalues = es.eigenvalues();
  hs.zero_threshold = rel_zero * std::abs(ed.value);
  hs.smallest_nonzero = std::numeric_limits<double>::infinity();
  for (int i = 0; i < hs.eigenvalues.size(); ++i) {
    const double l = hs.eigenvalues(i);
    if (std::abs(l) <= hs.zero_threshold) {
      ++hs.zero_modes;
      hs.largest_zero = std::max(hs.largest_zero, std::abs(l));
    } else {
      if (l < 0) ++hs.negative;
      hs.smallest_nonzero = std::min(hs.smallest_nonzero, std::abs(l));
    }
  }
  return hs;
}

}  // namespace fuller
