#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fuller/flows.hpp"
#include "fuller/rational.hpp"

namespace fuller {

// Identification closing an orbit: phi_T(z0) = apply(z0).  Either a
// phase-space lattice shift or a base deck transformation acting on (x, v).
struct Closure {
  Vec shift;
  std::optional<ClassDeck> deck;
  // Root identification and its power, when the closure is a known power.
  std::optional<ClassDeck> root_deck;
  int root_power = 1;

  static Closure lattice(Vec shift);
  static Closure geodesic(const ClassDeck& deck, int phase_dim);

  Vec apply(const Vec& z) const;
  Vec apply_inverse(const Vec& z) const;
  Mat jacobian(const Vec& z) const;
  Closure power(int n) const;
};

struct Section {
  Vec point;
  Vec normal;
};

struct ClosedOrbitRecord {
  Vec start;
  double period = 0.0;
  std::vector<Vec> loop;           // samples at t = k * period / loop.size()
  std::vector<Vec> loop_velocity;  // field values at the samples
  Closure closure;
  Mat monodromy;                   // J_closure(start)^-1 * D phi_period(start)
  Mat return_map;                  // transverse block, section dimension x section dimension
  Mat transverse_basis;            // phase-space directions spanning the section
  int multiplicity = 1;
  std::vector<std::complex<double>> multipliers;
  std::optional<int> index;        // empty: degenerate
  double residual = 0.0;
  double flow_defect = 0.0;        // |M f - f| / |f| on the energy level
  double monodromy_det = 1.0;      // product of all multipliers, trivial one included
  FreeHomotopyClass cls;
  int newton_iterations = 0;

  int section_dim() const { return static_cast<int>(return_map.rows()); }
  bool degenerate() const { return !index.has_value(); }
};

struct IndexConvention {
  int sigma = -1;
  std::string id;
};

// i = sigma^floor(d/2) * sign det(I - dP) for section dimension d.
// sigma is fixed by requiring F = +1 for a simple closed geodesic of a
// hyperbolic surface (see calibrate_sigma).
IndexConvention calibrated_convention();
// sigma making `raw_sign` (sign det(I - dP) of the reference orbit, d = 2) count +1.
int calibrate_sigma(int raw_sign);

struct OrbitSearchOptions {
  double tol = 1e-10;              // closure residual target (max norm)
  double accept_tol = 1e-8;        // residual accepted when Newton stagnates
  double integration_tol = 1e-12;
  double max_time = 200.0;
  double return_radius = 0.5;
  int max_newton = 30;
  std::optional<Closure> closure;  // otherwise read off the first return
  double period_guess = 0.0;       // skip return detection when > 0
  int loop_samples = 256;
  IndexConvention convention = calibrated_convention();
};

ClosedOrbitRecord find_closed_orbit(const VectorFieldSpec& field, const Vec& seed, const Section& section,
                                    const OrbitSearchOptions& opt = {});

struct TransverseSpectrum {
  Mat return_map;
  Mat basis;
  std::vector<std::complex<double>> multipliers;
  double flow_defect = 0.0;
  double restricted_det = 1.0;
};

// Monodromy `m` (already composed with the inverse closure jacobian) at z,
// restricted to the level set of the field's first integrals and quotiented
// by the flow direction.
TransverseSpectrum transverse_spectrum(const VectorFieldSpec& field, const Vec& z, const Mat& m);

std::vector<std::complex<double>> floquet_multipliers(const VectorFieldSpec& field, const ClosedOrbitRecord& orbit);

// Winding number of phi around the origin along the circle of radius r,
// starting from `samples` points with adaptive refinement.
int planar_degree(const std::function<Eigen::Vector2d(const Eigen::Vector2d&)>& phi, double r, int samples = 720);

// Nondegenerate: sigma^floor(d/2) sign det(I - P).  Degenerate with d = 2:
// sigma times the degree of x - P(x) on a small circle, evaluated with the
// nonlinear return map of `field`.
int fixed_point_index(const ClosedOrbitRecord& orbit, const IndexConvention& convention,
                      const VectorFieldSpec* field = nullptr);

// Phase point on the orbit at time tau (any real), Hermite interpolated.
Vec loop_at(const ClosedOrbitRecord& orbit, double tau);

int multiplicity(const ClosedOrbitRecord& orbit);

ClosedOrbitRecord cover(const ClosedOrbitRecord& orbit, int n, const IndexConvention& convention);

// min over phase shifts of the max-norm distance between the sampled loops
double loop_distance(const ClosedOrbitRecord& a, const ClosedOrbitRecord& b, const std::vector<PeriodicCoord>& periodic);

std::vector<ClosedOrbitRecord> s1_dedupe(const std::vector<ClosedOrbitRecord>& orbits,
                                         const std::vector<PeriodicCoord>& periodic, double tol = 1e-5);

struct FullerContribution {
  std::size_t orbit = 0;
  int index = 0;
  int multiplicity = 1;
};

struct FullerIndexResult {
  Rational value;
  std::vector<FullerContribution> contributions;
  std::string convention;
};

FullerIndexResult fuller_index(const std::vector<ClosedOrbitRecord>& orbits, const FreeHomotopyClass& cls,
                               const IndexConvention& convention = calibrated_convention());

std::string orbit_json(const ClosedOrbitRecord& orbit);

}  // namespace fuller
