#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <string_view>
#include <tuple>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/AutoDiff>

#include "fuller/error.hpp"

namespace fuller {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
template <class S>
using VecX = Eigen::Matrix<S, Eigen::Dynamic, 1>;
template <class S>
using MatX = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

// First and second order forward-mode scalars.
using Ad1 = Eigen::AutoDiffScalar<Vec>;
using Ad2 = Eigen::AutoDiffScalar<VecX<Ad1>>;

inline double primal(double x) { return x; }
template <class D>
double primal(const Eigen::AutoDiffScalar<D>& x) {
  return primal(x.value());
}

// ---------------------------------------------------------------------------
// Words and free homotopy classes

// Letter +k is generator k (1-based), -k its inverse.
using Word = std::vector<int>;
using LatticeVector = std::vector<long>;

Word free_reduce(const Word& w);
Word cyclic_reduce(const Word& w);
Word least_rotation(const Word& w);
Word inverse_word(const Word& w);
std::string word_to_string(const Word& w);
// Letters with ' for inverses, no reduction; "1" is the empty word.
Word parse_word(std::string_view text);

struct FreeHomotopyClass {
  bool is_word = false;
  LatticeVector lattice;
  Word word;
  bool lifted = false;

  bool constant() const;
  bool operator==(const FreeHomotopyClass&) const = default;
};

using RawClass = std::variant<LatticeVector, Word>;

std::string to_string(const FreeHomotopyClass& cls);

struct PowerDecomposition {
  FreeHomotopyClass root;
  int n = 1;
};

PowerDecomposition power_decomposition(const FreeHomotopyClass& cls);
FreeHomotopyClass class_power(const FreeHomotopyClass& root, int n);

// Class automorphism: word substitution or integer lattice matrix.
struct ClassMap {
  std::vector<Word> images;          // images[k-1] = image of generator k
  std::vector<Word> inverse_images;  // substitution undoing `images`
  Eigen::MatrixXi matrix;            // lattice form
  Eigen::MatrixXi inverse_matrix;

  bool is_substitution() const { return !images.empty(); }
  FreeHomotopyClass apply(const FreeHomotopyClass& cls) const;
  FreeHomotopyClass apply_inverse(const FreeHomotopyClass& cls) const;
};

ClassMap substitution_map(std::vector<Word> images, std::vector<Word> inverse_images);
ClassMap lattice_map(const Eigen::MatrixXi& m);

// ---------------------------------------------------------------------------
// Fuchsian groups

struct FuchsianGroup {
  int genus = 0;
  std::vector<Eigen::Matrix2d> generators;  // a1, b1, a2, b2, ...

  Eigen::Matrix2d element(const Word& w) const;
  double relation_residual() const;
  void validate() const;
};

// Side pairings of the regular hyperbolic 4g-gon with interior angles 2*pi/(4g).
FuchsianGroup regular_polygon_group(int genus);

// 2 arccosh(|tr|/2); NotHyperbolicElement when |tr| <= 2.
double translation_length(const Eigen::Matrix2d& m);

// ---------------------------------------------------------------------------
// Model spaces

enum class ModelKind { FlatTorus, FuchsianSurface, WarpedCylinder, Product, MappingTorus };

enum class WarpKind { Cosh, Flattening, Adversarial };

// ds^2 = dr^2 + w(r)^2 dtheta^2
struct WarpProfile {
  WarpKind kind = WarpKind::Cosh;
  double kappa = 0.0;
  double delta = 1.0;
  double center = 0.0;

  template <class S>
  S operator()(const S& r) const {
    using std::cosh;
    using std::exp;
    using std::tanh;
    switch (kind) {
      case WarpKind::Cosh: return cosh(r);
      case WarpKind::Flattening: return S(2.0) - S(1.0) / cosh(r);
      case WarpKind::Adversarial:
        return cosh(r) * exp(-kappa * (S(1.0) + tanh((r - center) / delta)) / 2.0);
    }
    return cosh(r);
  }
};

struct ModelSpace {
  ModelKind kind = ModelKind::FlatTorus;
  int dim = 0;
  Mat basis;                       // FlatTorus: rows are lattice vectors
  FuchsianGroup group;             // FuchsianSurface
  WarpProfile warp;                // WarpedCylinder, coordinates (r, theta)
  double window = 0.0;             // WarpedCylinder: search window |r| <= window
  std::vector<ModelSpace> factors; // Product: two factors; MappingTorus: the fiber
  ClassMap holonomy;               // MappingTorus monodromy on fiber classes

  static ModelSpace flat_torus(const Mat& basis);
  static ModelSpace circle(double length = 1.0);
  static ModelSpace fuchsian(FuchsianGroup group);
  static ModelSpace warped_cylinder(WarpProfile profile, double window);
  static ModelSpace product(ModelSpace fiber, ModelSpace base);
  static ModelSpace mapping_torus(ModelSpace fiber, ClassMap holonomy);

  bool compact() const;
  bool lattice_classes() const;
  int lattice_dim() const;
  int alphabet_size() const;
  std::string describe() const;
};

FreeHomotopyClass canonical_class(const RawClass& raw, const ModelSpace& model);
// "(m,n)" for lattice classes, letters with ' for inverses for words.
FreeHomotopyClass parse_class(std::string_view text, const ModelSpace& model);

bool is_boundary_incompressible(const FreeHomotopyClass& cls, const ModelSpace& model);
int euler_characteristic(const ModelSpace& model);

struct PeriodicCoord {
  int index = 0;
  double period = 1.0;
};

std::vector<PeriodicCoord> periodic_coords(const ModelSpace& model);
Vec sample_point(const ModelSpace& model, std::mt19937_64& rng);

// Deck transformation of the chart realizing a class: a lattice shift
// on periodic coordinates, optionally composed with a Moebius map acting
// on the upper half plane chart at `mobius_offset`.
struct ClassDeck {
  Vec shift;
  bool has_mobius = false;
  Eigen::Matrix2d mobius = Eigen::Matrix2d::Identity();
  int mobius_offset = 0;

  static ClassDeck identity(int dim);

  ClassDeck inverse() const;
  ClassDeck compose(const ClassDeck& inner) const;  // this after inner
  ClassDeck power(int n) const;

  template <class S>
  VecX<S> apply(const VecX<S>& x) const {
    VecX<S> y = x;
    for (int i = 0; i < shift.size(); ++i) y(i) += shift(i);
    if (has_mobius) {
      const S u = x(mobius_offset), w = x(mobius_offset + 1);
      const double a = mobius(0, 0), b = mobius(0, 1), c = mobius(1, 0), d = mobius(1, 1);
      // (a z + b) / (c z + d), z = u + i w
      const S nr = a * u + b, ni = a * w;
      const S dr = c * u + d, di = c * w;
      const S den = dr * dr + di * di;
      y(mobius_offset) = (nr * dr + ni * di) / den;
      y(mobius_offset + 1) = (ni * dr - nr * di) / den;
    }
    return y;
  }

  // Phase point (x, v) -> (deck x, d(deck) v).
  template <class S>
  VecX<S> apply_phase(const VecX<S>& z) const {
    const int n = static_cast<int>(z.size() / 2);
    VecX<S> out(z.size());
    out.head(n) = apply<S>(VecX<S>(z.head(n)));
    out.tail(n) = z.tail(n);
    if (has_mobius) {
      const S u = z(mobius_offset), w = z(mobius_offset + 1);
      const double c = mobius(1, 0), d = mobius(1, 1);
      // v -> v / (c z + d)^2
      const S dr = c * u + d, di = c * w;
      const S sr = dr * dr - di * di, si = 2.0 * dr * di;
      const S den = sr * sr + si * si;
      const S vr = z(n + mobius_offset), vi = z(n + mobius_offset + 1);
      out(n + mobius_offset) = (vr * sr + vi * si) / den;
      out(n + mobius_offset + 1) = (vi * sr - vr * si) / den;
    }
    return out;
  }

  Mat phase_jacobian(const Vec& z) const;
};

ClassDeck class_deck(const ModelSpace& model, const FreeHomotopyClass& cls);

// ---------------------------------------------------------------------------
// Metrics

enum class MetricKind { Riemannian, Finsler };

// Conformal bump psi = 1 + amplitude * (1 - (r/R)^2)^3 on r < R.
struct Bump {
  Vec center;
  double radius = 0.5;
  double amplitude = 0.0;
};

template <class S>
using TensorFn = std::function<MatX<S>(const VecX<S>&)>;
template <class S>
using PairFn = std::function<S(const VecX<S>&, const VecX<S>&)>;

class MetricSpec {
 public:
  MetricKind kind = MetricKind::Riemannian;
  int dim = 0;
  std::vector<Bump> bumps;
  double scale = 1.0;
  std::string description;

  // F is a generic callable usable with double, Ad1 and Ad2 arguments.
  template <class F>
  static MetricSpec riemannian(int dim, F tensor, std::string description) {
    MetricSpec m;
    m.kind = MetricKind::Riemannian;
    m.dim = dim;
    m.description = std::move(description);
    m.tensor_ = {TensorFn<double>(tensor), TensorFn<Ad1>(tensor), TensorFn<Ad2>(tensor)};
    return m;
  }

  template <class F>
  static MetricSpec finsler(int dim, F norm, std::string description) {
    MetricSpec m;
    m.kind = MetricKind::Finsler;
    m.dim = dim;
    m.description = std::move(description);
    m.norm_ = {PairFn<double>(norm), PairFn<Ad1>(norm), PairFn<Ad2>(norm)};
    return m;
  }

  // Exact squared distance used by short discrete segments.
  template <class F>
  void set_distance(F sqdist) {
    distance_ = {PairFn<double>(sqdist), PairFn<Ad1>(sqdist), PairFn<Ad2>(sqdist)};
  }
  bool has_exact_distance() const { return static_cast<bool>(std::get<0>(distance_)); }

  template <class S>
  MatX<S> tensor(const VecX<S>& x) const {
    if (kind != MetricKind::Riemannian) fail(ErrorKind::UnsupportedModel, "metric tensor of a Finsler norm");
    return std::get<TensorFn<S>>(tensor_)(x);
  }

  template <class S>
  S norm(const VecX<S>& x, const VecX<S>& v) const {
    using std::sqrt;
    if (kind == MetricKind::Finsler) return std::get<PairFn<S>>(norm_)(x, v);
    return sqrt(v.dot(tensor<S>(x) * v));
  }

  template <class S>
  S squared_distance(const VecX<S>& a, const VecX<S>& b) const {
    return std::get<PairFn<S>>(distance_)(a, b);
  }

 private:
  std::tuple<TensorFn<double>, TensorFn<Ad1>, TensorFn<Ad2>> tensor_;
  std::tuple<PairFn<double>, PairFn<Ad1>, PairFn<Ad2>> norm_;
  std::tuple<PairFn<double>, PairFn<Ad1>, PairFn<Ad2>> distance_;
};

// g, first and second partial derivatives of g at x.
struct MetricJet {
  Mat g;
  std::vector<Mat> dg;                // dg[k] = d_k g
  std::vector<std::vector<Mat>> d2g;  // d2g[k][l] = d_k d_l g
};

MetricJet metric_jet(const MetricSpec& metric, const Vec& x, int order);

// The model's own metric, scaled by `scale`^2 and conformally bumped.
MetricSpec standard_metric(const ModelSpace& model, std::vector<Bump> bumps = {}, double scale = 1.0);

// Randers norm sqrt(v^T A v) + b.v with constant A, b (|b|_A < 1).
MetricSpec randers_metric(const Mat& a, const Vec& b);

// Positive definiteness (Riemannian) or homogeneity/positivity (Finsler)
// on sampled points; InvalidInput on violation.
void validate_metric(const MetricSpec& metric, const ModelSpace& model, int samples = 200,
                     std::uint64_t seed = 1);

// ---------------------------------------------------------------------------
// Morse data

struct CriticalPoint {
  std::string label;
  int morse_index = 0;
  Vec location;
};

struct MorseFunctionSpec {
  std::vector<CriticalPoint> critical_points;
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;

  bool has_function() const { return static_cast<bool>(value); }
  int signed_count() const;
};

// cos(2 pi y) on the unit circle: maximum at 0, minimum at 1/2.
MorseFunctionSpec circle_height();
// Height function data of a genus-g surface: 1 minimum, 2g saddles, 1 maximum.
MorseFunctionSpec surface_height(int genus);
// InvalidInput unless the signed count equals the Euler characteristic.
void check_morse_data(const MorseFunctionSpec& f, const ModelSpace& model);

}  // namespace fuller
