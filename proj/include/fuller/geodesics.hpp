#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fuller/discrete_loop.hpp"
#include "fuller/flows.hpp"
#include "fuller/orbits.hpp"

namespace fuller {

enum class Backend { Algebraic, Variational };

std::string to_string(Backend b);

struct GeodesicString {
  DiscreteLoop loop;  // nodes at t = k / N, unit interval parametrization
  double length = 0.0;
  double energy = 0.0;
  FreeHomotopyClass cls;
  std::optional<int> morse_index;
  Backend backend = Backend::Variational;
  int multiplicity = 1;
  bool degenerate_family = false;  // zero-mode multiplicity >= 2
  int zero_modes = 0;
  double residual = 0.0;           // max over nodes of the metric-dual norm of the energy gradient
  double speed_spread = 0.0;
};

// Projected axis of the class element, traversed once from x_0 to g x_0.
GeodesicString hyperbolic_closed_geodesic(const FuchsianGroup& group, const FreeHomotopyClass& cls, int nodes = 256);

struct VariationalOptions {
  int n_seeds = 64;
  double tol = 1e-9;        // gradient residual per node
  int coarse_nodes = 64;
  int nodes = 256;
  int descent_steps = 40;
  double noise = 1e-3;
  std::uint64_t seed = 1;
};

struct SeedFailure {
  int seed = 0;
  std::string reason;
};

struct VariationalResult {
  std::vector<GeodesicString> strings;
  std::vector<SeedFailure> failures;
  int converged_seeds = 0;
  bool descent_monotone = true;  // every accepted descent step lowered the energy
};

// Errors: AllSeedsFailed; NoConvergence is recorded per seed.
VariationalResult variational_closed_geodesics(const MetricSpec& metric, const ModelSpace& model,
                                               const FreeHomotopyClass& cls, const VariationalOptions& opt = {});

// Negative Hessian eigenvalues of the discrete energy, one S^1 zero mode
// excluded.  Sets string.zero_modes and string.degenerate_family.
// SpectralGapTooSmall if the zero mode is not separated by a factor 100.
int morse_index(GeodesicString& string, const MetricSpec& metric, const ModelSpace& model);

// N -> 2N with Newton re-convergence and recomputed invariants.  Algebraic
// strings are re-sampled on the axis, others by midpoint insertion.
GeodesicString refine_string(const GeodesicString& string, const MetricSpec& metric, const ModelSpace& model,
                             double tol = 1e-9);

ClosedOrbitRecord lift_to_unit_bundle(const GeodesicString& string, const MetricSpec& metric, const ModelSpace& model);

// Algebraic for Fuchsian surfaces, variational otherwise.  Family members are
// returned flagged degenerate_family.
std::vector<GeodesicString> geodesic_strings(const MetricSpec& metric, const ModelSpace& model,
                                             const FreeHomotopyClass& cls, const VariationalOptions& opt = {});

struct TautnessReport {
  std::vector<GeodesicString> strings;
  double length_spread = 0.0;
  bool all_seeds_converged = true;
  bool family_detected = false;
  std::string verdict;  // "consistent-with-taut" or "family-detected"
  std::string window;   // search window for non-compact models
  std::string note;
};

TautnessReport tautness_certificate(const MetricSpec& metric, const ModelSpace& model, const FreeHomotopyClass& cls,
                                    int search_budget = 64);

// "# <json summary>" line, header, then "k,x0,x1,..." rows.
std::string string_csv(const GeodesicString& s);
std::string string_json(const GeodesicString& s);

}  // namespace fuller
