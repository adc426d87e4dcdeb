#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fuller/geodesics.hpp"
#include "fuller/orbits.hpp"
#include "fuller/rational.hpp"

namespace fuller {

enum class Route { FullerSum, MorseCount, ProductFormula };

std::string to_string(Route r);

struct LedgerEntry {
  std::string label;
  double length = 0.0;
  std::optional<int> index;        // fixed point index of the lifted orbit
  int multiplicity = 1;
  std::optional<int> morse_index;
  Rational contribution{0};
};

struct InvariantReport {
  Rational F{0};
  Route route = Route::FullerSum;
  FreeHomotopyClass cls;
  FreeHomotopyClass lifted;
  std::vector<LedgerEntry> ledger;
  std::vector<std::pair<Route, Rational>> consistency;
  std::string convention;

  bool consistent() const;
};

// Rationals as "p/q" strings.
std::string report_json(const InvariantReport& r);

// Fuller sum over the lifts of the class-beta geodesic strings.  Products and
// mapping tori go through the product formula with default Morse data.
// Errors: PerturbationRequired on a Morse-Bott family, IndexUndefined.
InvariantReport F_invariant(const MetricSpec& metric, const ModelSpace& model, const FreeHomotopyClass& cls,
                            const VariationalOptions& opt = {});

// Sum of (-1)^morse over the strings.  ClassIsPower when cls is a proper power.
int euler_characteristic_route(const MetricSpec& metric, const ModelSpace& model, const FreeHomotopyClass& cls,
                               const VariationalOptions& opt = {});

struct HolonomySpec {
  std::vector<ClassMap> generators;
  FreeHomotopyClass base_class;
  int orbit_bound = 10000;
};

// Round trip of every generator on random words (or matrix inverse check).
// InvalidInput when a generator is not invertible.
void check_holonomy(const HolonomySpec& spec, int alphabet_size, int words = 100, std::uint64_t seed = 3);

// Breadth-first closure of base_class under the generators and their inverses.
// OrbitBoundExceeded ("infinite suspected") past orbit_bound classes.
std::vector<FreeHomotopyClass> holonomy_orbit(const HolonomySpec& spec);
int holonomy_orbit_card(const HolonomySpec& spec);

Rational product_formula(int chi_Y, int card, const Rational& F_fiber);

struct RationalRealization {
  std::string construction;
  Rational value{0};
  Rational expected{0};
  Rational fiber_value{0};
  Rational fiber_expected{0};
  FreeHomotopyClass fiber_class;
  std::vector<std::string> stages;
  bool pass = false;
};

// sign < 0: Y genus p+1 over a genus-2 fiber with class a^(2q).
// sign > 0: the negative construction for (p, 2q) times a genus-2 factor.
// sign = 0: a circle factor.
RationalRealization realize_rational(long p, long q, int sign);

// V_t = R - t grad_S (P + f o pi) on the unit bundle of a flat product Z x Y;
// P is the squared norm of the fiber component of v.
// UnsupportedModel without function data or for curved factors.
VectorFieldSpec perturbed_product_flow(const MetricSpec& metric, const ModelSpace& model, const MorseFunctionSpec& f,
                                       double t);

// Largest increase of P between consecutive accepted steps along V_t
// trajectories from random unit phase points.
double vertical_energy_increase(const VectorFieldSpec& field, const MetricSpec& metric, const ModelSpace& model,
                                int samples = 8, double T = 5.0, std::uint64_t seed = 11);

struct CriticalFiberTerm {
  std::string label;
  int morse_index = 0;
  Rational fiber_sum{0};
};

struct ProductReport {
  Rational structural{0};
  Rational formula{0};
  std::optional<Rational> full_ode;
  int card = 1;
  int chi = 0;
  Rational F_fiber{0};
  FreeHomotopyClass fiber_class;
  std::vector<FreeHomotopyClass> orbit;
  std::vector<CriticalFiberTerm> terms;
  std::vector<ClosedOrbitRecord> ode_orbits;
  double condition_defect = 0.0;  // sampled submersion conditions, products only
  double vertical_increase = 0.0;
  std::vector<std::string> notes;
  bool pass = false;
};

struct ProductOptions {
  bool full_ode = true;  // only used for a product of two circles
  double t = 0.1;
  int seed_grid = 32;
};

ProductReport verify_euler_product(const ModelSpace& model, const FreeHomotopyClass& cls, const MorseFunctionSpec& f,
                                   const ProductOptions& opt = {});

std::string product_json(const ProductReport& r);

// Morse data used by default on a base factor: circle_height or surface_height.
MorseFunctionSpec default_morse_data(const ModelSpace& base);

}  // namespace fuller
