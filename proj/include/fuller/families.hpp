#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "fuller/geodesics.hpp"
#include "fuller/invariant.hpp"
#include "fuller/orbits.hpp"

namespace fuller {

enum class FamilyKind { Metric, Field };

// One-parameter family over t in [0, 1].
struct FamilySpec {
  std::string name;
  FamilyKind kind = FamilyKind::Field;
  ModelSpace model;  // metric families: the fixed underlying model
  std::function<MetricSpec(double)> metric_at;
  std::function<VectorFieldSpec(double)> field_at;
  // field families: phase points seeding the endpoint orbit search
  std::function<std::vector<Vec>(double)> seeds;
  ModelSpace class_model;  // parses class strings; a flat torus on the periodic coordinates for fields
  std::vector<int> window_coords;
  double window = std::numeric_limits<double>::infinity();
  double period_ceiling = 1e3;
  int grid = 101;
  std::string smoothness = "real-analytic in t";
  std::function<std::string(double)> describe_t;  // optional, e.g. the normal-form parameter

  VectorFieldSpec at(double t) const;
  // Identification closing orbits of class cls.
  Closure closure(const FreeHomotopyClass& cls) const;
  FreeHomotopyClass parse(const std::string& cls) const { return parse_class(cls, class_model); }
  bool inside_window(const Vec& z) const;
};

// {"kind": "metric_family", "model": {...}, "parameterization": {"name": ..., coefficients}}
// {"kind": "field_family", "parameterization": {"name": "escape" | "fold" | "blow_up", ...}, "window": w}
FamilySpec parse_family(const std::string& json_text);
FamilySpec load_family(const std::string& path);

// Grid evaluability; fields non-vanishing and metrics positive on samples.
void validate_family(const FamilySpec& family, int grid_stride = 10, int samples = 50);

enum class BranchStatus { ClosedLoop, ReachedEndpoint, Fold, PeriodBlowUp, EscapedWindow, Stalled };

std::string to_string(BranchStatus s);

struct BranchPoint {
  double t = 0.0;
  double s = 0.0;  // arc parameter
  ClosedOrbitRecord orbit;
};

struct FoldPoint {
  double t = 0.0;
  double s = 0.0;
  Vec z;
  double period = 0.0;
  double unit_multiplier_gap = 0.0;  // min |lambda - 1| over transverse multipliers
  double t_gap = 0.0;
};

struct FamilyBranch {
  std::vector<BranchPoint> points;
  BranchStatus status = BranchStatus::Stalled;
  BranchStatus end_reason = BranchStatus::Stalled;  // last event when status is Fold
  std::vector<FoldPoint> folds;
  std::string diagnostics;
};

struct ContinuationSettings {
  double ds = 0.05;
  double ds_min = 1e-7;
  double ds_max = 0.25;
  int max_steps = 2000;
  double corrector_tol = 1e-9;
  int max_corrector = 8;
  double fold_tol = 1e-7;       // arc-length bracket of a located fold
  double integration_tol = 1e-11;
  int direction = 1;            // initial sign of dt/ds
  double ceiling_factor = 1.0;  // multiplies the family's period ceiling
  double window_factor = 1.0;   // multiplies the family's window
};

// Pseudo-arclength continuation in (section point, period, t).
// start.residual must be below 1e-8.
FamilyBranch continue_branch(const FamilySpec& family, const ClosedOrbitRecord& start, double t0,
                             const ContinuationSettings& settings = {});

// Closed orbits of class cls at parameter t.
std::vector<ClosedOrbitRecord> endpoint_orbits(const FamilySpec& family, const FreeHomotopyClass& cls, double t,
                                               const VariationalOptions& opt = {});

struct SkyBranch {
  double t_start = 0.0;
  FamilyBranch branch;
};

struct SkyReport {
  bool flagged = false;
  std::string verdict;
  std::vector<SkyBranch> branches;
};

SkyReport detect_sky_catastrophe(const FamilySpec& family, const FreeHomotopyClass& cls,
                                 const std::vector<SkyBranch>& branches);
// Endpoint orbits at t = 0 and 1, continued inward, then classified.
SkyReport sky_analysis(const FamilySpec& family, const FreeHomotopyClass& cls, const ContinuationSettings& settings = {},
                       const VariationalOptions& opt = {});

struct SpreadReport {
  std::vector<double> t;
  std::vector<double> spread;
  std::vector<int> strings;
  double sup = 0.0;
  double ceiling = 1e3;
  bool satisfied = false;
  std::string verdict;
  std::string note;
};

// Sample points: `samples` evenly spaced t (the family grid when 0).
SpreadReport length_spread_criterion(const FamilySpec& family, const FreeHomotopyClass& cls, int samples = 0,
                                     const VariationalOptions& opt = {});

struct InvarianceReport {
  Rational F0{0}, F1{0};
  bool equal = false;
  std::vector<std::pair<double, Rational>> interior;
  InvariantReport report0, report1;
};

InvarianceReport basic_invariance_check(const FamilySpec& family, const FreeHomotopyClass& cls,
                                        const std::vector<double>& interior = {}, const VariationalOptions& opt = {});

struct GeodesibleReport {
  int samples = 0;
  double speed_deviation = 0.0;  // max | |X|_g - 1 |
  double residual = 0.0;         // max |D_X X + Gamma(X, X)|_g
  bool consistent = false;
  std::string verdict;
};

// Base fields (phase_dim = model.dim) or phase fields (projected curves).
GeodesibleReport geodesible_check(const VectorFieldSpec& field, const MetricSpec& metric, const ModelSpace& model,
                                  int samples = 200, std::uint64_t seed = 13);

// "# status" line, then "t,s,period,z0,...,re0,im0,..." rows.
std::string branch_csv(const FamilyBranch& branch);
std::string sky_json(const SkyReport& r);
std::string spread_json(const SpreadReport& r);

}  // namespace fuller
