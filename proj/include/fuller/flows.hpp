#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fuller/models.hpp"

namespace fuller {

struct FirstIntegral {
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;
};

struct VectorFieldSpec {
  int phase_dim = 0;
  std::function<Vec(const Vec&)> eval;
  std::function<Mat(const Vec&)> jacobian;  // optional
  std::vector<PeriodicCoord> periodic;
  std::vector<FirstIntegral> integrals;     // conserved quantities, optional

  Vec operator()(const Vec& z) const { return eval(z); }
  // Analytic jacobian when supplied, central differences otherwise.
  Mat jacobian_at(const Vec& z) const;
};

Mat finite_difference_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& z, double rel_step = 1e-6);

// ---------------------------------------------------------------------------
// Adaptive Runge-Kutta (Dormand-Prince fifth order weights) with
// step-doubling error control and local extrapolation.

struct IntegratorOptions {
  double tol = 1e-10;
  double initial_step = 1e-2;
  double min_step = 1e-14;
  double max_step = 0.25;
  std::size_t max_steps = 5'000'000;
};

struct StepStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t evaluations = 0;
  double smallest_step = 0.0;
  double largest_step = 0.0;
};

struct IntegrationEnd {
  double t = 0.0;
  Vec y;
  bool stopped = false;  // observer requested a stop
};

namespace detail {

template <class Rhs>
Vec rk5_step(Rhs& rhs, const Vec& y, const Vec& k1, double h, std::size_t& evals) {
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                          b6 = 11.0 / 84;
  const Vec k2 = rhs(Vec(y + h * a21 * k1));
  const Vec k3 = rhs(Vec(y + h * (a31 * k1 + a32 * k2)));
  const Vec k4 = rhs(Vec(y + h * (a41 * k1 + a42 * k2 + a43 * k3)));
  const Vec k5 = rhs(Vec(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4)));
  const Vec k6 = rhs(Vec(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5)));
  evals += 5;
  return y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
}

inline void check_finite(const Vec& v) {
  if (!v.allFinite()) fail(ErrorKind::NonFinite, "vector field evaluated to a non-finite value");
}

}  // namespace detail

// Observer signature: bool(double t_prev, const Vec& y_prev, double t, const Vec& y);
// returning false stops the integration after the current step.
template <class Rhs, class Observer>
IntegrationEnd integrate_adaptive(Rhs&& rhs_in, Vec y, double t0, double t1, const IntegratorOptions& opt,
                                  StepStats& stats, Observer&& observe) {
  auto rhs = [&](const Vec& z) {
    Vec f = rhs_in(z);
    detail::check_finite(f);
    return f;
  };
  double t = t0;
  double h = std::min(opt.initial_step, opt.max_step);
  stats.smallest_step = std::numeric_limits<double>::infinity();
  while (t < t1) {
    if (stats.accepted + stats.rejected >= opt.max_steps)
      fail(ErrorKind::StepUnderflow, "step budget exhausted at t = " + std::to_string(t));
    const bool last = t + h >= t1;
    const double hs = last ? t1 - t : h;
    const Vec k1 = rhs(y);
    stats.evaluations += 1;
    const Vec full = detail::rk5_step(rhs, y, k1, hs, stats.evaluations);
    const Vec mid = detail::rk5_step(rhs, y, k1, hs / 2, stats.evaluations);
    const Vec km = rhs(mid);
    stats.evaluations += 1;
    const Vec two = detail::rk5_step(rhs, mid, km, hs / 2, stats.evaluations);
    const Vec delta = (two - full) / 31.0;
    const Vec scale = (y.cwiseAbs().cwiseMax(two.cwiseAbs()).array() + 1.0).matrix();
    const double err = (delta.cwiseAbs().cwiseQuotient(scale)).maxCoeff() / opt.tol;
    if (!std::isfinite(err)) fail(ErrorKind::NonFinite, "non-finite error estimate");
    if (err <= 1.0) {
      const Vec y_prev = y;
      const double t_prev = t;
      y = two + delta;
      t = last ? t1 : t + hs;
      ++stats.accepted;
      stats.smallest_step = std::min(stats.smallest_step, hs);
      stats.largest_step = std::max(stats.largest_step, hs);
      if (!observe(t_prev, y_prev, t, y)) return {t, y, true};
      const double grow = err > 0 ? 0.9 * std::pow(err, -1.0 / 6.0) : 5.0;
      if (!last) h = std::min(opt.max_step, hs * std::clamp(grow, 0.2, 5.0));
    } else {
      ++stats.rejected;
      h = hs * std::clamp(0.9 * std::pow(err, -1.0 / 6.0), 0.1, 0.9);
      if (h < opt.min_step)
        fail(ErrorKind::StepUnderflow, "adaptive step fell below " + std::to_string(opt.min_step) +
                                           " at t = " + std::to_string(t));
    }
  }
  return {t, y, false};
}

template <class Rhs>
IntegrationEnd integrate_adaptive(Rhs&& rhs, Vec y, double t0, double t1, const IntegratorOptions& opt,
                                  StepStats& stats) {
  return integrate_adaptive(std::forward<Rhs>(rhs), std::move(y), t0, t1, opt, stats,
                            [](double, const Vec&, double, const Vec&) { return true; });
}

// ---------------------------------------------------------------------------

struct Trajectory {
  std::vector<double> times;
  std::vector<Vec> states;     // angle coordinates reduced to [0, period)
  std::vector<long> winding;   // per periodic coordinate, over the whole run
  Vec end_unwrapped;
  double tol = 0.0;
  StepStats stats;
};

// x -> (reduced x, number of periods removed)
std::pair<double, long> reduce_angle(double x, double period);

Trajectory integrate_flow(const VectorFieldSpec& field, const Vec& x0, double T, double tol = 1e-10);

struct FlowWithMonodromy {
  Vec end;
  Mat monodromy;
  StepStats stats;
};

FlowWithMonodromy integrate_with_monodromy(const VectorFieldSpec& field, const Vec& x0, double T,
                                           double tol = 1e-10);

// ---------------------------------------------------------------------------
// Geodesic flow on the unit tangent bundle, phase point z = (x, v).

struct GeodesicFlowField {
  VectorFieldSpec field;
  MetricSpec metric;
  ModelSpace model;
  int base_dim = 0;

  // lambda_g(z)(w) = d_v(F^2/2)(x, v) . w_x
  double contact_form(const Vec& z, const Vec& w) const;
  double speed(const Vec& z) const;
  // (x, direction rescaled to unit speed)
  Vec unit_phase_point(const Vec& x, const Vec& direction) const;
};

GeodesicFlowField geodesic_field(const MetricSpec& metric, const ModelSpace& model);

struct ReebReport {
  int samples = 0;
  double max_lambda_deviation = 0.0;  // max |lambda(R) - 1|
  double max_dlambda = 0.0;           // max |dlambda(R, w)|
  bool ok() const { return max_lambda_deviation < 1e-6 && max_dlambda < 1e-6; }
};

ReebReport reeb_conditions_check(const GeodesicFlowField& flow, int n_samples, std::uint64_t seed = 7);

}  // namespace fuller
