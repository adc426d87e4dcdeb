#pragma once

#include <vector>

#include "fuller/models.hpp"

namespace fuller {

// Polygonal loop x_0 .. x_{N-1}, closed by x_N = deck(x_0).
struct DiscreteLoop {
  std::vector<Vec> nodes;
  ClassDeck deck;
  FreeHomotopyClass cls;

  int size() const { return static_cast<int>(nodes.size()); }
  int dim() const { return nodes.empty() ? 0 : static_cast<int>(nodes.front().size()); }
  Vec flatten() const;
  void assign(const Vec& flat);
  // node k for any integer k, through powers of the deck
  Vec node(int k) const;
};

// e = N * sum_k s(x_k, x_{k+1}); s is the exact squared distance when the
// metric has one, the trapezoidal |dx|^2 otherwise.
double loop_energy(const MetricSpec& metric, const DiscreteLoop& loop);

struct EnergyDerivatives {
  double value = 0.0;
  Vec gradient;
  Mat hessian;  // empty unless requested
};

EnergyDerivatives energy_derivatives(const MetricSpec& metric, const DiscreteLoop& loop, bool hessian);

std::vector<double> segment_lengths(const MetricSpec& metric, const DiscreteLoop& loop);
double loop_length(const MetricSpec& metric, const DiscreteLoop& loop);
// max_k |l_k / mean - 1|
double speed_spread(const MetricSpec& metric, const DiscreteLoop& loop);

// Midpoint insertion, N -> 2N.
DiscreteLoop refine(const DiscreteLoop& loop);

struct DescentTrace {
  int iterations = 0;
  std::vector<double> energies;  // one entry per accepted step, starting value first
  bool monotone = true;
};

// Sobolev-preconditioned gradient descent with Armijo backtracking.
DescentTrace descend(const MetricSpec& metric, DiscreteLoop& loop, int max_iterations, double rel_gradient_tol = 1e-6);

struct NewtonOutcome {
  bool converged = false;
  int iterations = 0;
  double residual = 0.0;  // max over nodes of the metric-dual norm of the energy gradient
};

// Newton on the energy gradient with an eigen-decomposition pseudo-inverse
// (near-zero modes dropped); converges to nearby critical points of any index.
NewtonOutcome newton_refine(const MetricSpec& metric, DiscreteLoop& loop, double tol = 1e-10, int max_iterations = 40);

struct HessianSpectrum {
  Vec eigenvalues;       // ascending
  int negative = 0;      // below -zero threshold
  int zero_modes = 0;    // |lambda| < zero_threshold
  double zero_threshold = 0.0;
  double largest_zero = 0.0;
  double smallest_nonzero = 0.0;
};

HessianSpectrum hessian_spectrum(const MetricSpec& metric, const DiscreteLoop& loop, double rel_zero = 1e-7);

}  // namespace fuller
