#include <cmath>
#include <numbers>

#include "fuller/models.hpp"

namespace fuller {

ModelSpace ModelSpace::flat_torus(const Mat& basis) {
  if (basis.rows() != basis.cols() || basis.rows() < 1)
    fail(ErrorKind::InvalidInput, "lattice basis must be square");
  if (std::abs(basis.determinant()) < 1e-12) fail(ErrorKind::InvalidInput, "lattice basis is singular");
  ModelSpace m;
  m.kind = ModelKind::FlatTorus;
  m.dim = static_cast<int>(basis.rows());
  m.basis = basis;
  return m;
}

ModelSpace ModelSpace::circle(double length) { return flat_torus(Mat::Constant(1, 1, length)); }

ModelSpace ModelSpace::fuchsian(FuchsianGroup group) {
  group.validate();
  ModelSpace m;
  m.kind = ModelKind::FuchsianSurface;
  m.dim = 2;
  m.group = std::move(group);
  return m;
}

ModelSpace ModelSpace::warped_cylinder(WarpProfile profile, double window) {
  if (window <= 0) fail(ErrorKind::InvalidInput, "warped cylinder window must be positive");
  ModelSpace m;
  m.kind = ModelKind::WarpedCylinder;
  m.dim = 2;
  m.warp = profile;
  m.window = window;
  return m;
}

ModelSpace ModelSpace::product(ModelSpace fiber, ModelSpace base) {
  ModelSpace m;
  m.kind = ModelKind::Product;
  m.dim = fiber.dim + base.dim;
  m.factors = {std::move(fiber), std::move(base)};
  return m;
}

ModelSpace ModelSpace::mapping_torus(ModelSpace fiber, ClassMap holonomy) {
  ModelSpace m;
  m.kind = ModelKind::MappingTorus;
  m.dim = fiber.dim + 1;
  m.factors = {std::move(fiber)};
  m.holonomy = std::move(holonomy);
  return m;
}

bool ModelSpace::compact() const {
  switch (kind) {
    case ModelKind::FlatTorus:
    case ModelKind::FuchsianSurface: return true;
    case ModelKind::WarpedCylinder: return false;
    case ModelKind::Product: return factors[0].compact() && factors[1].compact();
    case ModelKind::MappingTorus: return factors[0].compact();
  }
  return false;
}

bool ModelSpace::lattice_classes() const {
  switch (kind) {
    case ModelKind::FlatTorus:
    case ModelKind::WarpedCylinder: return true;
    case ModelKind::FuchsianSurface: return false;
    case ModelKind::Product:
      return factors[0].lattice_classes() && (factors[1].lattice_classes() || !factors[0].lattice_classes());
    case ModelKind::MappingTorus: return factors[0].lattice_classes();
  }
  return false;
}

int ModelSpace::lattice_dim() const {
  switch (kind) {
    case ModelKind::FlatTorus: return dim;
    case ModelKind::WarpedCylinder: return 1;
    case ModelKind::Product:
      return factors[0].lattice_dim() + (factors[1].lattice_classes() ? factors[1].lattice_dim() : 0);
    case ModelKind::MappingTorus: return factors[0].lattice_dim();
    case ModelKind::FuchsianSurface: return 0;
  }
  return 0;
}

int ModelSpace::alphabet_size() const {
  switch (kind) {
    case ModelKind::FuchsianSurface: return 2 * group.genus;
    case ModelKind::Product:
    case ModelKind::MappingTorus: return factors[0].alphabet_size();
    default: return 0;
  }
}

std::string ModelSpace::describe() const {
  switch (kind) {
    case ModelKind::FlatTorus: return dim == 1 ? "circle" : "flat T^" + std::to_string(dim);
    case ModelKind::FuchsianSurface: return "genus-" + std::to_string(group.genus) + " hyperbolic surface";
    case ModelKind::WarpedCylinder: return "warped cylinder";
    case ModelKind::Product: return factors[0].describe() + " x " + factors[1].describe();
    case ModelKind::MappingTorus: return "mapping torus of " + factors[0].describe();
  }
  return "model";
}

bool is_boundary_incompressible(const FreeHomotopyClass& cls, const ModelSpace& model) {
  if (model.compact()) return !cls.constant();
  if (model.kind == ModelKind::WarpedCylinder) return !cls.is_word && !cls.lattice.empty() && cls.lattice[0] != 0;
  fail(ErrorKind::UnsupportedModel, "incompressibility on " + model.describe() + " needs an exhaustion argument");
}

int euler_characteristic(const ModelSpace& model) {
  switch (model.kind) {
    case ModelKind::FlatTorus:
      if (model.dim <= 2) return 0;
      break;
    case ModelKind::FuchsianSurface: return 2 - 2 * model.group.genus;
    case ModelKind::Product: return euler_characteristic(model.factors[0]) * euler_characteristic(model.factors[1]);
    default: break;
  }
  fail(ErrorKind::UnsupportedModel, "Euler characteristic of " + model.describe());
}

std::vector<PeriodicCoord> periodic_coords(const ModelSpace& model) {
  std::vector<PeriodicCoord> out;
  switch (model.kind) {
    case ModelKind::FlatTorus:
      for (int i = 0; i < model.dim; ++i) out.push_back({i, 1.0});
      break;
    case ModelKind::WarpedCylinder: out.push_back({1, 2 * std::numbers::pi}); break;
    case ModelKind::FuchsianSurface: break;
    case ModelKind::Product: {
      out = periodic_coords(model.factors[0]);
      for (auto p : periodic_coords(model.factors[1])) out.push_back({p.index + model.factors[0].dim, p.period});
      break;
    }
    case ModelKind::MappingTorus: fail(ErrorKind::UnsupportedModel, "mapping tori have no flow chart");
  }
  return out;
}

Vec sample_point(const ModelSpace& model, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vec x(model.dim);
  switch (model.kind) {
    case ModelKind::FlatTorus:
      for (int i = 0; i < model.dim; ++i) x(i) = u(rng);
      break;
    case ModelKind::FuchsianSurface:
      x(0) = u(rng) - 0.5;
      x(1) = std::exp(std::log(0.5) + u(rng) * std::log(4.0));
      break;
    case ModelKind::WarpedCylinder:
      x(0) = (2 * u(rng) - 1) * model.window;
      x(1) = 2 * std::numbers::pi * u(rng);
      break;
    case ModelKind::Product: {
      const int n0 = model.factors[0].dim;
      x.head(n0) = sample_point(model.factors[0], rng);
      x.tail(model.dim - n0) = sample_point(model.factors[1], rng);
      break;
    }
    case ModelKind::MappingTorus: fail(ErrorKind::UnsupportedModel, "mapping tori have no flow chart");
  }
  return x;
}

// ---------------------------------------------------------------------------

ClassDeck ClassDeck::identity(int dim) {
  ClassDeck d;
  d.shift = Vec::Zero(dim);
  return d;
}

ClassDeck ClassDeck::inverse() const {
  ClassDeck d = *this;
  d.shift = -shift;
  d.mobius = mobius.inverse();
  return d;
}

ClassDeck ClassDeck::compose(const ClassDeck& inner) const {
  ClassDeck d = *this;
  d.shift = shift + inner.shift;
  if (inner.has_mobius) {
    d.has_mobius = true;
    d.mobius_offset = inner.mobius_offset;
    d.mobius = mobius * inner.mobius;
  }
  return d;
}

ClassDeck ClassDeck::power(int n) const {
  ClassDeck base = n >= 0 ? *this : inverse();
  ClassDeck d = identity(static_cast<int>(shift.size()));
  for (int k = 0; k < std::abs(n); ++k) d = d.compose(base);
  if (has_mobius) {
    d.has_mobius = true;
    d.mobius_offset = mobius_offset;
  }
  return d;
}

Mat ClassDeck::phase_jacobian(const Vec& z) const {
  const int m = static_cast<int>(z.size());
  if (!has_mobius) return Mat::Identity(m, m);
  VecX<Ad1> za(m);
  for (int i = 0; i < m; ++i) za(i) = Ad1(z(i), Vec::Unit(m, i));
  VecX<Ad1> out = apply_phase<Ad1>(za);
  Mat j(m, m);
  for (int i = 0; i < m; ++i) j.row(i) = out(i).derivatives().transpose();
  return j;
}

ClassDeck class_deck(const ModelSpace& model, const FreeHomotopyClass& cls) {
  ClassDeck d = ClassDeck::identity(model.dim);
  switch (model.kind) {
    case ModelKind::FlatTorus:
      for (int i = 0; i < model.dim; ++i) d.shift(i) = static_cast<double>(cls.lattice.at(static_cast<std::size_t>(i)));
      return d;
    case ModelKind::WarpedCylinder:
      d.shift(1) = 2 * std::numbers::pi * static_cast<double>(cls.lattice.at(0));
      return d;
    case ModelKind::FuchsianSurface:
      d.has_mobius = true;
      d.mobius = model.group.element(cls.word);
      return d;
    case ModelKind::Product: {
      const ModelSpace& f0 = model.factors[0];
      const ModelSpace& f1 = model.factors[1];
      FreeHomotopyClass c0 = cls, c1;
      if (model.lattice_classes()) {
        const auto n0 = static_cast<long>(f0.lattice_dim());
        c0.lattice = LatticeVector(cls.lattice.begin(), cls.lattice.begin() + n0);
        c1.lattice = LatticeVector(cls.lattice.begin() + n0, cls.lattice.end());
      } else {
        c1.lattice = LatticeVector(static_cast<std::size_t>(f1.lattice_dim()), 0);
      }
      ClassDeck d0 = class_deck(f0, c0);
      ClassDeck d1 = f1.lattice_classes() ? class_deck(f1, c1) : ClassDeck::identity(f1.dim);
      d.shift.head(f0.dim) = d0.shift;
      d.shift.tail(f1.dim) = d1.shift;
      if (d0.has_mobius) {
        d.has_mobius = true;
        d.mobius = d0.mobius;
        d.mobius_offset = d0.mobius_offset;
      }
      return d;
    }
    case ModelKind::MappingTorus: break;
  }
  fail(ErrorKind::UnsupportedModel, "deck transformations on " + model.describe());
}

// ---------------------------------------------------------------------------

int MorseFunctionSpec::signed_count() const {
  int s = 0;
  for (const auto& c : critical_points) s += (c.morse_index % 2 == 0) ? 1 : -1;
  return s;
}

MorseFunctionSpec circle_height() {
  const double tau = 2 * std::numbers::pi;
  MorseFunctionSpec f;
  f.critical_points = {{"max", 1, Vec::Constant(1, 0.0)}, {"min", 0, Vec::Constant(1, 0.5)}};
  f.value = [tau](const Vec& y) { return std::cos(tau * y(0)); };
  f.gradient = [tau](const Vec& y) { return Vec::Constant(1, -tau * std::sin(tau * y(0))); };
  return f;
}

MorseFunctionSpec surface_height(int genus) {
  MorseFunctionSpec f;
  f.critical_points.push_back({"min", 0, {}});
  for (int k = 1; k <= 2 * genus; ++k) f.critical_points.push_back({"saddle" + std::to_string(k), 1, {}});
  f.critical_points.push_back({"max", 2, {}});
  return f;
}

void check_morse_data(const MorseFunctionSpec& f, const ModelSpace& model) {
  const int chi = euler_characteristic(model);
  if (f.signed_count() != chi)
    fail(ErrorKind::InvalidInput, "signed critical point count " + std::to_string(f.signed_count()) +
                                      " differs from Euler characteristic " + std::to_string(chi));
}

}  // namespace fuller
