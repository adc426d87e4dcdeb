#include <cmath>
#include <complex>
#include <numbers>

#include "fuller/models.hpp"

namespace fuller {

namespace {

using Mat2c = Eigen::Matrix2cd;
using cd = std::complex<double>;

Mat2c rot(double theta) {
  Mat2c m = Mat2c::Zero();
  m(0, 0) = std::polar(1.0, theta / 2);
  m(1, 1) = std::polar(1.0, -theta / 2);
  return m;
}

Mat2c translate(double s) {
  Mat2c m;
  m << std::cosh(s / 2), std::sinh(s / 2), std::sinh(s / 2), std::cosh(s / 2);
  return m;
}

Eigen::Matrix2d commutator(const Eigen::Matrix2d& a, const Eigen::Matrix2d& b) {
  return a * b * a.inverse() * b.inverse();
}

}  // namespace

Eigen::Matrix2d FuchsianGroup::element(const Word& w) const {
  Eigen::Matrix2d m = Eigen::Matrix2d::Identity();
  for (int l : w) {
    const auto k = static_cast<std::size_t>(std::abs(l) - 1);
    if (l == 0 || k >= generators.size())
      fail(ErrorKind::UnknownGenerator, "letter " + std::to_string(l) + " not in group");
    m = m * (l > 0 ? generators[k] : Eigen::Matrix2d(generators[k].inverse()));
  }
  return m;
}

double FuchsianGroup::relation_residual() const {
  Eigen::Matrix2d r = Eigen::Matrix2d::Identity();
  for (std::size_t k = 0; k + 1 < generators.size(); k += 2) r = r * commutator(generators[k], generators[k + 1]);
  const Eigen::Matrix2d id = Eigen::Matrix2d::Identity();
  return std::min((r - id).cwiseAbs().maxCoeff(), (r + id).cwiseAbs().maxCoeff());
}

void FuchsianGroup::validate() const {
  if (genus < 1 || generators.size() != static_cast<std::size_t>(2 * genus))
    fail(ErrorKind::InvalidInput, "Fuchsian group needs 2g generators");
  for (std::size_t k = 0; k < generators.size(); ++k) {
    const auto& g = generators[k];
    if (std::abs(g.determinant() - 1.0) > 1e-9)
      fail(ErrorKind::InvalidInput, "generator " + std::to_string(k + 1) + " has determinant != 1");
    if (std::abs(g.trace()) <= 2.0)
      fail(ErrorKind::NotHyperbolicElement, "generator " + std::to_string(k + 1) + " is not hyperbolic");
  }
  if (relation_residual() > 1e-9) fail(ErrorKind::InvalidInput, "surface relation fails");
}

FuchsianGroup regular_polygon_group(int genus) {
  if (genus < 2) fail(ErrorKind::InvalidInput, "hyperbolic surfaces need genus >= 2");
  const int n = 4 * genus;
  const double pi = std::numbers::pi;
  const double alpha = 2 * pi / n;
  const double d = std::acosh(std::cos(alpha / 2) / std::sin(pi / n));
  auto theta = [&](int k) { return 2 * pi * k / n; };
  auto pairing = [&](int i, int j) { return Mat2c(rot(theta(j)) * translate(2 * d) * rot(pi - theta(i))); };

  Mat2c k;
  k << cd(1, 0), cd(0, -1), cd(1, 0), cd(0, 1);
  const Mat2c kinv = k.inverse();
  auto to_real = [&](const Mat2c& m) {
    Mat2c r = kinv * m * k;
    Eigen::Matrix2d out = r.real();
    return Eigen::Matrix2d(out / std::sqrt(out.determinant()));
  };

  FuchsianGroup g;
  g.genus = genus;
  for (int j = 0; j < genus; ++j) {
    g.generators.push_back(to_real(pairing(4 * j + 2, 4 * j)));
    g.generators.push_back(to_real(pairing(4 * j + 1, 4 * j + 3)));
  }
  return g;
}

double translation_length(const Eigen::Matrix2d& m) {
  const double t = std::abs(m.trace());
  if (t <= 2.0) fail(ErrorKind::NotHyperbolicElement, "|trace| = " + std::to_string(t) + " <= 2");
  return 2.0 * std::acosh(t / 2.0);
}

}  // namespace fuller
