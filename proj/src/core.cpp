#include "xdiff/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "xdiff/kernels.hpp"

namespace xdiff {

bool Composition::in_closed_simplex(double tol) const {
  double sum = 0.0;
  for (int i = 0; i < n(); ++i) {
    if (!(u[i] >= -tol && u[i] <= 1.0 + tol)) return false;
    sum += u[i];
  }
  return sum <= 1.0 + tol;
}

bool Composition::strictly_interior(double margin) const {
  double sum = 0.0;
  for (int i = 0; i < n(); ++i) {
    if (!(u[i] > margin)) return false;
    sum += u[i];
  }
  return 1.0 - sum > margin;
}

AugmentedComposition AugmentedComposition::from(const Composition& c) {
  Vector bar(c.n() + 1);
  bar[0] = c.solvent();
  bar.tail(c.n()) = c.u;
  return AugmentedComposition(std::move(bar));
}

bool AugmentedComposition::strictly_interior(double margin) const {
  for (int i = 0; i < static_cast<int>(bar.size()); ++i)
    if (!(bar[i] > margin)) return false;
  return true;
}

GridField::GridField(int species, int cells, double length)
    : species_(species), cells_(cells), length_(length) {
  if (species < 1) throw InvalidParameter("GridField: species count must be >= 1");
  if (cells < 2) throw InvalidParameter("GridField: cell count must be >= 2");
  if (!(length > 0.0)) throw InvalidParameter("GridField: domain length must be > 0");
  data_.assign(static_cast<std::size_t>(species) * cells, 0.0);
}

Composition GridField::composition(int c) const {
  Vector u(species_);
  for (int i = 0; i < species_; ++i) u[i] = at(i, c);
  return Composition(std::move(u));
}

void GridField::set_composition(int c, const Composition& v) {
  for (int i = 0; i < species_; ++i) at(i, c) = v.u[i];
}

GridField GridField::constant(const Composition& c, int cells, double length) {
  GridField f(c.n(), cells, length);
  for (int cell = 0; cell < cells; ++cell) f.set_composition(cell, c);
  return f;
}

bool GridField::strictly_interior(double margin) const {
  return min_fraction() > margin;
}

double GridField::min_fraction() const {
  double m = std::numeric_limits<double>::infinity();
  for (int c = 0; c < cells_; ++c) {
    double sum = 0.0;
    for (int i = 0; i < species_; ++i) {
      sum += at(i, c);
      m = std::min(m, at(i, c));
    }
    m = std::min(m, 1.0 - sum);
  }
  return m;
}

double GridField::mass(int i) const {
  double s = 0.0;
  const double* p = species_data(i);
  for (int c = 0; c < cells_; ++c) s += p[c];
  return s * cell_width();
}

// ---- entropy calculus ------------------------------------------------------

namespace {
inline double xlogx_minus_x(double x) {
  return x > 0.0 ? x * (std::log(x) - 1.0) : 0.0;
}
}  // namespace

double entropy_density(const Composition& c) {
  double h = xlogx_minus_x(c.solvent());
  for (int i = 0; i < c.n(); ++i) h += xlogx_minus_x(c.u[i]);
  return h;
}

double entropy_functional(const GridField& f) {
  std::vector<const double*> species(f.species());
  for (int i = 0; i < f.species(); ++i) species[i] = f.species_data(i);
  const double sum = kernels::active_ops().entropy_sum(
      species.data(), f.species(), static_cast<std::size_t>(f.cells()));
  return sum * f.cell_width();
}

EntropyVars to_entropy_vars(const Composition& c) {
  const double u0 = c.solvent();
  if (!(u0 > 0.0)) throw BoundaryComposition("to_entropy_vars: solvent fraction vanishes");
  Vector w(c.n());
  for (int i = 0; i < c.n(); ++i) {
    if (!(c.u[i] > 0.0))
      throw BoundaryComposition("to_entropy_vars: species fraction vanishes");
    w[i] = std::log(c.u[i] / u0);
  }
  return EntropyVars(std::move(w));
}

Composition from_entropy_vars(const EntropyVars& v) {
  // Max-shift stabilization: exponentials stay <= 1, the normalizer stays
  // >= 1 in the shifted frame, and clamping keeps every fraction strictly
  // inside (0, 1) even when exp underflows.
  const int n = v.n();
  double shift = 0.0;
  for (int i = 0; i < n; ++i) shift = std::max(shift, v.w[i]);
  constexpr double kTiny = std::numeric_limits<double>::denorm_min();
  constexpr double kBelowOne = 1.0 - std::numeric_limits<double>::epsilon() / 2.0;
  double z = std::max(std::exp(-shift), kTiny);
  Vector e(n);
  for (int i = 0; i < n; ++i) {
    e[i] = std::max(std::exp(v.w[i] - shift), kTiny);
    z += e[i];
  }
  Vector u(n);
  for (int i = 0; i < n; ++i) u[i] = std::min(e[i] / z, kBelowOne);
  // division rounding can push the species sum onto 1 when the solvent
  // share underflows; rescale so the result stays strictly interior
  const double sum = u.sum();
  if (sum >= 1.0) u *= kBelowOne / sum;
  return Composition(std::move(u));
}

Matrix hessian(const Composition& c) {
  const double u0 = c.solvent();
  if (!c.strictly_interior())
    throw BoundaryComposition("hessian: undefined on the simplex boundary");
  const int n = c.n();
  Matrix h = Matrix::Constant(n, n, 1.0 / u0);
  for (int i = 0; i < n; ++i) h(i, i) += 1.0 / c.u[i];
  return h;
}

Matrix hessian_inverse(const Composition& c) {
  const int n = c.n();
  Matrix h(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      h(i, j) = (i == j ? c.u[i] : 0.0) - c.u[i] * c.u[j];
  return h;
}

}  // namespace xdiff
